//! Decomposition run configuration: built-in defaults, then a TOML file, then
//! command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sunsky::decompose::{GmmConfig, PairFilterConfig, DEFAULT_DILATION_RADIUS, DEFAULT_EPS_DENOMINATOR};

use crate::config_error;

pub const DEFAULT_SKY_SAMPLES: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum SunSource {
    /// Solar position from each record's capture time and site.
    Ephemeris,
    /// Fixed angles in degrees for every image.
    Explicit { azimuth: f64, elevation: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SkyMode {
    Uniform,
    Measured { dome: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Pooling {
    PerImage,
    PerFlight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub sun: SunSource,
    pub sky: SkyMode,
    pub sky_samples: usize,
    pub seed: u64,
    /// 0 uses every available thread.
    pub workers: usize,
    pub pooling: Pooling,
    pub downsample: usize,
    pub dilation_radius: usize,
    pub eps_denominator: f64,
    pub dump_pairs: bool,
    pub pairs: PairFilterConfig,
    pub gmm: GmmConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            mesh: None,
            output: None,
            sun: SunSource::Ephemeris,
            sky: SkyMode::Uniform,
            sky_samples: DEFAULT_SKY_SAMPLES,
            seed: 1,
            workers: 0,
            pooling: Pooling::PerImage,
            downsample: 1,
            dilation_radius: DEFAULT_DILATION_RADIUS,
            eps_denominator: DEFAULT_EPS_DENOMINATOR,
            dump_pairs: false,
            pairs: PairFilterConfig::default(),
            gmm: GmmConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.manifest);
        rebase(&mut cfg.mesh);
        rebase(&mut cfg.output);
        if let SkyMode::Measured { dome } = &mut cfg.sky {
            *dome = base.join(&*dome);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        for (name, value) in [("manifest", &self.manifest), ("mesh", &self.mesh), ("output", &self.output)] {
            if value.is_none() {
                return Err(config_error(format!("no {name} given (flag or config file)")));
            }
        }
        if let SunSource::Explicit { azimuth, elevation } = self.sun {
            if !azimuth.is_finite() || !(elevation > 0.0 && elevation <= 90.0) {
                return Err(config_error(format!(
                    "explicit sun needs a finite azimuth and an elevation in (0, 90], got {azimuth}, {elevation}"
                )));
            }
        }
        if self.sky_samples < sunsky::geometry::MIN_SKY_SAMPLES {
            return Err(config_error(format!(
                "sky_samples must be at least {}",
                sunsky::geometry::MIN_SKY_SAMPLES
            )));
        }
        if self.downsample == 0 {
            return Err(config_error("downsample must be >= 1"));
        }
        if !(self.eps_denominator > 0.0) {
            return Err(config_error("eps_denominator must be positive"));
        }
        if !(self.gmm.tol > 0.0) || self.gmm.max_iter == 0 {
            return Err(config_error("gmm max_iter and tol must be positive"));
        }
        self.pairs.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn gmm_config(&self) -> GmmConfig {
        GmmConfig {
            min_samples: self.pairs.min_pairs,
            ..self.gmm
        }
    }
}
