//! Lighting-invariant change detection by differencing albedo images from a
//! fixed camera.

use serde::{Deserialize, Serialize};

use crate::imagecore::{to_display_gray8, BinaryMask};
use crate::{Error, LinearImage, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChangeConfig {
    /// 8-bit gray-level difference; pixels strictly above it change.
    pub threshold: u8,
    /// 8-connected blobs smaller than this are dropped.
    pub min_blob_area: usize,
    /// Disk radius of the final opening.
    pub opening_radius: usize,
}

impl Default for ChangeConfig {
    fn default() -> Self {
        Self {
            threshold: 30,
            min_blob_area: 25,
            opening_radius: 2,
        }
    }
}

impl ChangeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.threshold == 0 || self.threshold == 255 {
            return Err(Error::invalid(format!("threshold {} outside (0, 255)", self.threshold)));
        }
        Ok(())
    }
}

/// `|gray(source) − gray(reference)| > threshold`, before any morphology.
pub fn difference_mask(reference: &LinearImage, source: &LinearImage, threshold: u8) -> Result<BinaryMask> {
    if !reference.same_size(source) {
        return Err(Error::DimensionMismatch(format!(
            "reference {}x{} vs source {}x{}",
            reference.width(),
            reference.height(),
            source.width(),
            source.height()
        )));
    }
    let a = to_display_gray8(reference);
    let b = to_display_gray8(source);
    BinaryMask::new(
        a.width,
        a.height,
        a.data.iter().zip(&b.data).map(|(x, y)| x.abs_diff(*y) > threshold).collect(),
    )
}

/// The blob-removal and opening stage applied after thresholding.
pub fn clean_mask(mask: &BinaryMask, cfg: &ChangeConfig) -> BinaryMask {
    mask.remove_small_blobs(cfg.min_blob_area).open(cfg.opening_radius)
}

/// Thresholded gray-level difference, small-blob removal, then opening.
pub fn change_mask(reference: &LinearImage, source: &LinearImage, cfg: &ChangeConfig) -> Result<BinaryMask> {
    cfg.validate()?;
    Ok(clean_mask(&difference_mask(reference, source, cfg.threshold)?, cfg))
}
