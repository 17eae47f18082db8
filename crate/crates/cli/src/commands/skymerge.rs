//! `sunsky skymerge`: exposure stack to equirectangular sky dome.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sunsky::geometry::{Mat3, Vec3};
use sunsky::illum::{fisheye_to_equirect, merge_hdr, ExposureStack, FisheyeCalibration, DEFAULT_FLOOR, DEFAULT_SATURATION};
use sunsky::imagecore::{luminance, write_linear_exr};

use super::read_exr;
use crate::{config_error, Outcome};

#[derive(Debug, Clone, clap::Args)]
pub struct SkymergeArgs {
    /// CSV with columns `path,exposure_s`; paths relative to the CSV.
    #[arg(long)]
    pub stack: PathBuf,
    /// TOML fisheye calibration (`focal`, `center`, optional `rotation`).
    #[arg(long)]
    pub calibration: PathBuf,
    /// Output dome EXR.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 1024)]
    pub width: usize,
    #[arg(long, default_value_t = 512)]
    pub height: usize,
    #[arg(long, default_value_t = DEFAULT_SATURATION)]
    pub saturation: f64,
    #[arg(long, default_value_t = DEFAULT_FLOOR)]
    pub floor: f64,
}

/// On-disk fisheye calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    /// Pixels per radian of the equidistant model.
    pub focal: f64,
    /// Optical centre, pixels.
    pub center: [f64; 2],
    /// Camera-to-world rotation, row-major; identity (lens at zenith, image
    /// x east, image y north) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<[f64; 9]>,
}

impl CalibrationFile {
    pub fn read(path: &Path) -> anyhow::Result<FisheyeCalibration> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read calibration {}: {e}", path.display())))?;
        let file: CalibrationFile =
            toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let rotation = file.rotation.map_or(Mat3::identity(), |r| Mat3::from_row_slice(&r));
        let err = (rotation.transpose() * rotation - Mat3::identity()).amax();
        if !(err < 1e-6) {
            return Err(config_error("calibration rotation is not orthonormal"));
        }
        Ok(FisheyeCalibration {
            focal: file.focal,
            center: (file.center[0], file.center[1]),
            rotation,
        })
    }
}

pub fn read_stack(path: &Path) -> anyhow::Result<ExposureStack> {
    let base = path.parent().unwrap_or(Path::new(""));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| config_error(format!("cannot read stack {}: {e}", path.display())))?;
    let (mut frames, mut times) = (Vec::new(), Vec::new());
    for row in reader.deserialize::<(String, f64)>() {
        let (file, t) = row.map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        frames.push(luminance(&read_exr(&base.join(file))?)?);
        times.push(t);
    }
    Ok(ExposureStack::new(frames, times)?)
}

pub fn run_skymerge(args: &SkymergeArgs) -> anyhow::Result<Outcome> {
    let calib = CalibrationFile::read(&args.calibration)?;
    let stack = read_stack(&args.stack)?;
    let radiance = merge_hdr(&stack, args.saturation, args.floor)?;
    let dome = fisheye_to_equirect(&radiance, &calib, args.width, args.height)?;
    write_linear_exr(&dome.equirect, &args.output)?;
    let zenith = dome.sample(&Vec3::z());
    log::info!("wrote {}x{} dome, zenith luminance {zenith:.4}", args.width, args.height);
    Ok(Outcome {
        succeeded: 1,
        failed: 0,
    })
}
