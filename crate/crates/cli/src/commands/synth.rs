//! `sunsky synth`: writes a synthetic scene and all of its ground truth.

use std::path::{Path, PathBuf};

use chrono::{TimeZone, Utc};
use serde::Serialize;
use sunsky::par;
use sunsky::synth::{build_scene, render_ground_truth, SceneSpec};

use super::{create_dir, write_exr, write_png, write_text};
use crate::config::{RunConfig, SunSource, DEFAULT_SKY_SAMPLES};
use crate::manifest::{format_record, HEADER};
use crate::{config_error, Outcome};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const MESH_FILE: &str = "scene.obj";
pub const SPEC_FILE: &str = "scene.toml";
pub const CONFIG_FILE: &str = "decompose.toml";
pub const TRUTH_FILE: &str = "truth.json";

#[derive(Debug, Clone, clap::Args)]
pub struct SynthArgs {
    /// Scene spec TOML; built-in defaults when absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SKY_SAMPLES)]
    pub sky_samples: usize,
    /// Seed for sky-shading sample patterns.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Serialize)]
struct Truth {
    phi: [f64; 3],
    sun_azimuth: f64,
    sun_elevation: f64,
    cameras: Vec<String>,
}

pub fn camera_id(index: usize) -> String {
    format!("cam{index}")
}

fn read_spec(path: &Path) -> anyhow::Result<SceneSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read scene spec {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

pub fn run_synth(args: &SynthArgs) -> anyhow::Result<Outcome> {
    let spec = match &args.spec {
        Some(p) => read_spec(p)?,
        None => SceneSpec::default(),
    };
    spec.validate().map_err(|e| config_error(e.to_string()))?;
    let scene = build_scene(&spec)?;
    let out = &args.output;
    create_dir(out)?;
    write_text(out, SPEC_FILE, &toml::to_string(&spec)?)?;
    scene.mesh.write_obj(out.join(MESH_FILE))?;

    // The sun is given explicitly by the companion config, so capture time
    // and site are placeholders.
    let utc = Utc.with_ymd_and_hms(2000, 1, 1, 0, 0, 0).unwrap();
    let mut manifest = format!("{HEADER}\n");
    for (i, cam) in scene.cameras.iter().enumerate() {
        let id = camera_id(i);
        manifest.push_str(&format_record(&id, &format!("{id}.exr"), cam, &utc, 0.0, 0.0, None));
        manifest.push('\n');
    }
    write_text(out, MANIFEST_FILE, &manifest)?;

    let run = RunConfig {
        manifest: Some(MANIFEST_FILE.into()),
        mesh: Some(MESH_FILE.into()),
        output: Some("decomposed".into()),
        sun: SunSource::Explicit {
            azimuth: scene.sun.azimuth,
            elevation: scene.sun.elevation,
        },
        sky_samples: args.sky_samples,
        seed: args.seed,
        ..RunConfig::default()
    };
    write_text(out, CONFIG_FILE, &run.to_toml())?;
    let truth = Truth {
        phi: scene.phi_true,
        sun_azimuth: scene.sun.azimuth,
        sun_elevation: scene.sun.elevation,
        cameras: (0..scene.cameras.len()).map(camera_id).collect(),
    };
    write_text(out, TRUTH_FILE, &(serde_json::to_string_pretty(&truth)? + "\n"))?;

    par::with_workers(args.workers, || -> anyhow::Result<()> {
        for i in 0..scene.cameras.len() {
            let id = camera_id(i);
            let gt = render_ground_truth(&scene, i, args.sky_samples, args.seed)?;
            write_exr(&gt.image, out, &format!("{id}.exr"))?;
            write_exr(&gt.albedo, out, &format!("{id}_albedo.exr"))?;
            write_exr(&gt.shading.sun_image(), out, &format!("{id}_sun_shading.exr"))?;
            write_exr(&gt.shading.sky_image(), out, &format!("{id}_sky_shading.exr"))?;
            write_exr(&gt.buffers.depth_image(), out, &format!("{id}_depth.exr"))?;
            write_exr(&gt.buffers.normal_image(), out, &format!("{id}_normal.exr"))?;
            let vis = gt.buffers.sun_visibility.as_ref().expect("rendered");
            write_png(vis, out, &format!("{id}_sun_visibility.png"))?;
            write_png(&gt.buffers.hit, out, &format!("{id}_hit.png"))?;
            log::info!("rendered {id}");
        }
        Ok(())
    })??;
    Ok(Outcome {
        succeeded: scene.cameras.len(),
        failed: 0,
    })
}
