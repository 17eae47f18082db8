//! `sunsky decompose`: per-image albedo recovery over a manifest.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;
use sunsky::decompose::{
    build_confidence_mask, detect_lit_shadow_pairs, fit_phi_gmm, mesh_boundary, phi_per_pair, recover_albedo,
    LitShadowPair, SunSkyRatio,
};
use sunsky::geometry::{compute_sun_visibility, render_geometry, GeometryBuffers, TriangleMesh};
use sunsky::illum::{
    align_sky_dome, compute_sky_shading_measured, compute_sky_shading_uniform, compute_sun_shading, sun_direction,
    ShadingMaps, SkyDome, SunPosition,
};
use sunsky::imagecore::{downsample_box, luminance};
use sunsky::{par, LinearImage};

use super::{create_dir, read_exr, write_exr, write_png, write_text};
use crate::config::{Pooling, RunConfig, SkyMode, SunSource};
use crate::manifest::{read_manifest, ImageRecord};
use crate::{config_error, Outcome};

pub const REPORT_FILE: &str = "run_report.json";
pub const CONFIG_ECHO_FILE: &str = "effective_config.toml";

#[derive(Debug, Clone, Default, clap::Args)]
pub struct DecomposeArgs {
    /// TOML run configuration; flags given here override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Image manifest (header line plus one record per image).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Scene mesh (Wavefront OBJ).
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Fixed sun azimuth, degrees clockwise from north.
    #[arg(long, requires = "sun_elevation", conflicts_with = "ephemeris")]
    pub sun_azimuth: Option<f64>,
    /// Fixed sun elevation, degrees.
    #[arg(long, requires = "sun_azimuth", conflicts_with = "ephemeris")]
    pub sun_elevation: Option<f64>,
    /// Compute the sun from each record's UTC time and site.
    #[arg(long)]
    pub ephemeris: bool,
    /// Equirectangular sky dome EXR; switches to the measured-sky model.
    #[arg(long, conflicts_with = "uniform_sky")]
    pub sky_dome: Option<PathBuf>,
    /// Use the uniform-sky model even if the config names a dome.
    #[arg(long)]
    pub uniform_sky: bool,
    /// Hemisphere samples per pixel for sky shading.
    #[arg(long)]
    pub sky_samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses all.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub pooling: Option<Pooling>,
    /// Integer box-downsampling applied to images and cameras.
    #[arg(long)]
    pub downsample: Option<usize>,
    /// Confidence-mask dilation radius, pixels.
    #[arg(long)]
    pub dilation_radius: Option<usize>,
    #[arg(long)]
    pub eps_denominator: Option<f64>,
    /// Also write each image's lit/shadow pairs as CSV.
    #[arg(long)]
    pub dump_pairs: bool,
    #[arg(long)]
    pub search_radius: Option<usize>,
    /// Degrees.
    #[arg(long)]
    pub max_normal_angle: Option<f64>,
    /// Metres.
    #[arg(long)]
    pub max_depth_diff: Option<f64>,
    #[arg(long)]
    pub min_shadow_brightness: Option<f64>,
    #[arg(long)]
    pub min_pairs: Option<usize>,
    #[arg(long)]
    pub max_sky_diff: Option<f64>,
    #[arg(long)]
    pub gmm_max_iter: Option<usize>,
    #[arg(long)]
    pub gmm_tol: Option<f64>,
}

impl DecomposeArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($field:expr, $value:expr) => {
                if let Some(v) = $value.clone() {
                    $field = v;
                }
            };
        }
        if self.manifest.is_some() {
            cfg.manifest = self.manifest.clone();
        }
        if self.mesh.is_some() {
            cfg.mesh = self.mesh.clone();
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        if let (Some(azimuth), Some(elevation)) = (self.sun_azimuth, self.sun_elevation) {
            cfg.sun = SunSource::Explicit { azimuth, elevation };
        }
        if self.ephemeris {
            cfg.sun = SunSource::Ephemeris;
        }
        if let Some(dome) = &self.sky_dome {
            cfg.sky = SkyMode::Measured { dome: dome.clone() };
        }
        if self.uniform_sky {
            cfg.sky = SkyMode::Uniform;
        }
        set!(cfg.sky_samples, self.sky_samples);
        set!(cfg.seed, self.seed);
        set!(cfg.workers, self.workers);
        set!(cfg.pooling, self.pooling);
        set!(cfg.downsample, self.downsample);
        set!(cfg.dilation_radius, self.dilation_radius);
        set!(cfg.eps_denominator, self.eps_denominator);
        cfg.dump_pairs |= self.dump_pairs;
        set!(cfg.pairs.boundary_search_radius, self.search_radius);
        set!(cfg.pairs.max_normal_angle, self.max_normal_angle);
        set!(cfg.pairs.max_depth_diff, self.max_depth_diff);
        if self.min_shadow_brightness.is_some() {
            cfg.pairs.min_shadow_brightness = self.min_shadow_brightness;
        }
        set!(cfg.pairs.min_pairs, self.min_pairs);
        set!(cfg.pairs.max_sky_diff, self.max_sky_diff);
        set!(cfg.gmm.max_iter, self.gmm_max_iter);
        set!(cfg.gmm.tol, self.gmm_tol);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageReport {
    pub id: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
    pub pair_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub succeeded: usize,
    pub failed: usize,
    pub images: Vec<ImageReport>,
}

#[derive(Serialize)]
struct PhiRecord<'a> {
    id: &'a str,
    phi: &'a [f64],
    pooled: bool,
    flight: Option<&'a str>,
    /// Accepted φ samples from this image.
    sample_count: usize,
    /// Samples behind the fit (differs from `sample_count` when pooled).
    fit_sample_count: usize,
    pair_count: usize,
    sun_azimuth: f64,
    sun_elevation: f64,
    dome_gain: Option<f64>,
    confident_pixels: usize,
    flagged_pixels: usize,
    channels: &'a [sunsky::decompose::ChannelFit],
}

/// Everything computed for one image before φ is known.
struct Prepared {
    image: LinearImage,
    buffers: GeometryBuffers,
    shading: ShadingMaps,
    pairs: Vec<LitShadowPair>,
    samples: Vec<Vec<f64>>,
    sun: SunPosition,
    dome_gain: Option<f64>,
}

struct Shared<'a> {
    cfg: &'a RunConfig,
    mesh: &'a TriangleMesh,
    dome: Option<&'a SkyDome>,
    output: &'a Path,
}

fn load_dome(path: &Path) -> anyhow::Result<SkyDome> {
    let img = read_exr(path)?;
    Ok(SkyDome::new(luminance(&img)?)?)
}

fn prepare(record: &ImageRecord, shared: &Shared) -> anyhow::Result<Prepared> {
    let cfg = shared.cfg;
    let mut image = read_exr(&record.image)?;
    let mut camera = record.camera.clone();
    if cfg.downsample > 1 {
        image = downsample_box(&image, cfg.downsample)?;
        camera = camera.downscaled(cfg.downsample)?;
    }
    if (image.width(), image.height()) != (camera.width, camera.height) {
        return Err(anyhow!(
            "image is {}x{} but the camera expects {}x{}",
            image.width(),
            image.height(),
            camera.width,
            camera.height
        ));
    }
    let sun = match cfg.sun {
        SunSource::Explicit { azimuth, elevation } => SunPosition::from_angles(azimuth, elevation)?,
        SunSource::Ephemeris => sun_direction(record.latitude, record.longitude, record.utc)?,
    };
    if !(sun.elevation > 0.0) {
        return Err(anyhow!("sun is below the horizon (elevation {:.3}°)", sun.elevation));
    }

    let mut buffers = render_geometry(shared.mesh, &camera);
    let visibility = compute_sun_visibility(shared.mesh, &buffers, &sun.direction)?;
    let s_sun = compute_sun_shading(&buffers, &visibility, &sun);
    let uniform = compute_sky_shading_uniform(shared.mesh, &buffers, cfg.sky_samples, cfg.seed)?;
    let (s_sky, dome_gain) = match shared.dome {
        None => (uniform, None),
        Some(dome) => {
            let unit = dome.clone().with_gain(1.0)?;
            let raw = compute_sky_shading_measured(shared.mesh, &buffers, &unit, cfg.sky_samples, cfg.seed)?;
            let gain = align_sky_dome(&uniform, &raw, &buffers.hit)?;
            (raw.iter().map(|v| (*v as f64 * gain) as f32).collect(), Some(gain))
        }
    };
    buffers.sun_visibility = Some(visibility);
    let shading = ShadingMaps::new(s_sun, s_sky, buffers.hit.clone())?;
    let pairs = detect_lit_shadow_pairs(&image, &buffers, &shading, &cfg.pairs);
    let samples = pairs.iter().filter_map(phi_per_pair).collect();
    Ok(Prepared {
        image,
        buffers,
        shading,
        pairs,
        samples,
        sun,
        dome_gain,
    })
}

fn pairs_csv(pairs: &[LitShadowPair]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lit_x", "lit_y", "shadow_x", "shadow_y", "phi_0", "phi_1", "phi_2"])?;
    for p in pairs {
        let phi = phi_per_pair(p);
        let mut row = vec![
            p.lit_pixel.0.to_string(),
            p.lit_pixel.1.to_string(),
            p.shadow_pixel.0.to_string(),
            p.shadow_pixel.1.to_string(),
        ];
        for c in 0..3 {
            row.push(phi.as_ref().and_then(|v| v.get(c)).map_or(String::new(), |v| format!("{v:?}")));
        }
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn finish(record: &ImageRecord, prep: &Prepared, phi: &SunSkyRatio, pooled: bool, shared: &Shared) -> anyhow::Result<()> {
    let cfg = shared.cfg;
    let (dir, id) = (shared.output, record.id.as_str());
    let (albedo, flagged) = recover_albedo(&prep.image, phi, &prep.shading, cfg.eps_denominator)?;
    let sun_vis = prep.buffers.sun_visibility.as_ref().expect("set in prepare");
    let confidence = build_confidence_mask(&prep.buffers, sun_vis, &mesh_boundary(&prep.buffers), cfg.dilation_radius)
        .and_not(&flagged);

    write_exr(&albedo, dir, &format!("{id}_albedo.exr"))?;
    write_exr(&prep.shading.sun_image(), dir, &format!("{id}_sun_shading.exr"))?;
    write_exr(&prep.shading.sky_image(), dir, &format!("{id}_sky_shading.exr"))?;
    write_exr(&prep.buffers.depth_image(), dir, &format!("{id}_depth.exr"))?;
    write_exr(&prep.buffers.normal_image(), dir, &format!("{id}_normal.exr"))?;
    write_png(&confidence, dir, &format!("{id}_confidence.png"))?;
    let record_json = PhiRecord {
        id,
        phi: &phi.phi,
        pooled,
        flight: record.flight.as_deref(),
        sample_count: prep.samples.len(),
        fit_sample_count: phi.sample_count,
        pair_count: prep.pairs.len(),
        sun_azimuth: prep.sun.azimuth,
        sun_elevation: prep.sun.elevation,
        dome_gain: prep.dome_gain,
        confident_pixels: confidence.count(),
        flagged_pixels: flagged.count(),
        channels: &phi.channels,
    };
    write_text(dir, &format!("{id}_phi.json"), &(serde_json::to_string_pretty(&record_json)? + "\n"))?;
    if cfg.dump_pairs {
        write_text(dir, &format!("{id}_pairs.csv"), &pairs_csv(&prep.pairs)?)?;
    }
    Ok(())
}

/// Batches processed together: a flight when pooling, otherwise runs of
/// consecutive images sized to the thread pool.
fn groups(records: &[ImageRecord], pooling: Pooling) -> Vec<Vec<usize>> {
    match pooling {
        Pooling::PerImage => {
            let size = par::current_threads().max(1);
            (0..records.len()).collect::<Vec<_>>().chunks(size).map(<[usize]>::to_vec).collect()
        }
        Pooling::PerFlight => {
            let mut out: Vec<(Option<&str>, Vec<usize>)> = Vec::new();
            for (i, r) in records.iter().enumerate() {
                match r.flight.as_deref() {
                    Some(f) => match out.iter_mut().find(|(k, _)| *k == Some(f)) {
                        Some((_, v)) => v.push(i),
                        None => out.push((Some(f), vec![i])),
                    },
                    None => out.push((None, vec![i])),
                }
            }
            out.into_iter().map(|(_, v)| v).collect()
        }
    }
}

fn process_group(records: &[ImageRecord], group: &[usize], shared: &Shared) -> Vec<(usize, ImageReport)> {
    let cfg = shared.cfg;
    let prepared = par::map_slice(group, |&i| prepare(&records[i], shared));
    let gmm = cfg.gmm_config();
    let pooled = match cfg.pooling {
        Pooling::PerFlight => {
            let all: Vec<Vec<f64>> = prepared.iter().flatten().flat_map(|p| p.samples.iter().cloned()).collect();
            Some(fit_phi_gmm(&all, &gmm).map_err(|e| e.to_string()))
        }
        Pooling::PerImage => None,
    };
    let finished = par::map_slice(&group.iter().zip(prepared).collect::<Vec<_>>(), |(i, prep)| {
        let record = &records[**i];
        let result = prep.as_ref().map_err(|e| format!("{e:#}")).and_then(|prep| {
            let phi = match &pooled {
                Some(p) => p.clone().map_err(|e| format!("pooled φ fit failed: {e}"))?,
                None => fit_phi_gmm(&prep.samples, &gmm).map_err(|e| format!("φ fit failed: {e}"))?,
            };
            finish(record, prep, &phi, pooled.is_some(), shared)
                .map(|_| (phi.phi.clone(), prep.pairs.len()))
                .map_err(|e| format!("{e:#}"))
        });
        let pair_count = prep.as_ref().map_or(0, |p| p.pairs.len());
        let report = match result {
            Ok((phi, _)) => ImageReport {
                id: record.id.clone(),
                status: Status::Ok,
                error: None,
                phi: Some(phi),
                pair_count,
            },
            Err(e) => {
                log::error!("{}: {e}", record.id);
                ImageReport {
                    id: record.id.clone(),
                    status: Status::Failed,
                    error: Some(e),
                    phi: None,
                    pair_count,
                }
            }
        };
        (**i, report)
    });
    finished
}

pub fn run_decompose(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    cfg.validate()?;
    let manifest = cfg.manifest.as_deref().expect("validated");
    let output = cfg.output.as_deref().expect("validated");
    let mesh_path = cfg.mesh.as_deref().expect("validated");
    let records = read_manifest(manifest)?;
    let mesh = TriangleMesh::read_obj(mesh_path)
        .map_err(|e| config_error(format!("cannot load mesh {}: {e}", mesh_path.display())))?;
    let dome = match &cfg.sky {
        SkyMode::Uniform => None,
        SkyMode::Measured { dome } => {
            Some(load_dome(dome).map_err(|e| config_error(format!("cannot load sky dome: {e:#}")))?)
        }
    };
    create_dir(output)?;
    write_text(output, CONFIG_ECHO_FILE, &cfg.to_toml())?;
    log::info!("decomposing {} images against {} triangles", records.len(), mesh.triangle_count());

    let shared = Shared {
        cfg,
        mesh: &mesh,
        dome: dome.as_ref(),
        output,
    };
    let mut reports: Vec<(usize, ImageReport)> = par::with_workers(cfg.workers, || {
        groups(&records, cfg.pooling)
            .iter()
            .flat_map(|g| process_group(&records, g, &shared))
            .collect()
    })?;
    reports.sort_by_key(|(i, _)| *i);
    let images: Vec<ImageReport> = reports.into_iter().map(|(_, r)| r).collect();
    let failed = images.iter().filter(|r| r.status == Status::Failed).count();
    let report = RunReport {
        succeeded: images.len() - failed,
        failed,
        images,
    };
    write_text(output, REPORT_FILE, &(serde_json::to_string_pretty(&report).context("report")? + "\n"))?;
    Ok(Outcome {
        succeeded: report.succeeded,
        failed,
    })
}
