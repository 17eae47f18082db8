#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use sunsky::synth::{CameraRigSpec, SceneSpec};
use sunsky_cli::commands::synth::{run_synth, SynthArgs};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sunsky"))
}

pub fn small_spec() -> SceneSpec {
    SceneSpec {
        cameras: CameraRigSpec {
            width: 160,
            height: 107,
            focal: 187.0,
            ..CameraRigSpec::default()
        },
        ..SceneSpec::default()
    }
}

/// Writes a synthetic fixture for `spec` into `dir` and returns its path.
pub fn fixture(dir: &Path, spec: &SceneSpec, sky_samples: usize) -> PathBuf {
    let spec_path = dir.join("spec.toml");
    std::fs::write(&spec_path, toml::to_string(spec).unwrap()).unwrap();
    let out = dir.join("scene");
    run_synth(&SynthArgs {
        spec: Some(spec_path),
        output: out.clone(),
        sky_samples,
        seed: 1,
        workers: 0,
    })
    .unwrap();
    out
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
