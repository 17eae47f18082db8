use super::SunSkyRatio;
use crate::illum::ShadingMaps;
use crate::imagecore::BinaryMask;
use crate::{Error, LinearImage, Result};

/// Lower bound on the shading denominator, in normalized shading units.
pub const DEFAULT_EPS_DENOMINATOR: f64 = 1e-4;

fn check(img: &LinearImage, phi: &SunSkyRatio, shading: &ShadingMaps) -> Result<()> {
    if img.width() != shading.width || img.height() != shading.height {
        return Err(Error::DimensionMismatch("image and shading differ in size".into()));
    }
    if phi.phi.len() != img.channels() {
        return Err(Error::DimensionMismatch(format!(
            "{} φ channels for a {}-channel image",
            phi.phi.len(),
            img.channels()
        )));
    }
    Ok(())
}

/// `R_c = I_c / max(φ_c·S_sun + S_sky, eps)`.
///
/// Returns the albedo and a mask of flagged pixels: those outside the valid
/// shading mask (albedo set to 0) and those where the denominator clamp fired.
pub fn recover_albedo(
    img: &LinearImage,
    phi: &SunSkyRatio,
    shading: &ShadingMaps,
    eps_denominator: f64,
) -> Result<(LinearImage, BinaryMask)> {
    check(img, phi, shading)?;
    let ch = img.channels();
    let w = img.width();
    let mut flagged = vec![false; img.pixel_count()];
    let mut data = vec![0.0f32; img.pixel_count() * ch];
    for p in 0..img.pixel_count() {
        if !shading.valid.at(p) {
            flagged[p] = true;
            continue;
        }
        let (sun, sky) = (shading.s_sun[p] as f64, shading.s_sky[p] as f64);
        for c in 0..ch {
            let denom = phi.phi[c] * sun + sky;
            if denom < eps_denominator {
                flagged[p] = true;
            }
            data[p * ch + c] = (img.at(p, c) as f64 / denom.max(eps_denominator)) as f32;
        }
    }
    Ok((
        LinearImage::new(w, img.height(), ch, data)?,
        BinaryMask::new(w, img.height(), flagged)?,
    ))
}

/// Forward model `I_c = R_c · (φ_c·S_sun + S_sky)`.
pub fn compose_image(albedo: &LinearImage, phi: &SunSkyRatio, shading: &ShadingMaps) -> Result<LinearImage> {
    check(albedo, phi, shading)?;
    let ch = albedo.channels();
    let data = (0..albedo.pixel_count())
        .flat_map(|p| {
            let (sun, sky) = (shading.s_sun[p] as f64, shading.s_sky[p] as f64);
            (0..ch).map(move |c| (albedo.at(p, c) as f64 * (phi.phi[c] * sun + sky)) as f32)
        })
        .collect();
    LinearImage::new(albedo.width(), albedo.height(), ch, data)
}

/// Inverse-Retinex shading `S_c = I_c / max(R_c, eps)`. Recombining an
/// edited albedo with this shading relights the edit consistently.
pub fn extract_shading(img: &LinearImage, albedo: &LinearImage, eps: f64) -> Result<LinearImage> {
    if !img.same_shape(albedo) {
        return Err(Error::DimensionMismatch("image and albedo differ in shape".into()));
    }
    let data = img
        .data()
        .iter()
        .zip(albedo.data())
        .map(|(&i, &r)| (i as f64 / (r as f64).max(eps)) as f32)
        .collect();
    LinearImage::new(img.width(), img.height(), img.channels(), data)
}

/// Channel-wise product of albedo and shading (material-edit recombination).
pub fn recombine(albedo: &LinearImage, shading: &LinearImage) -> Result<LinearImage> {
    if !albedo.same_shape(shading) {
        return Err(Error::DimensionMismatch("albedo and shading differ in shape".into()));
    }
    let data = albedo.data().iter().zip(shading.data()).map(|(a, s)| a * s).collect();
    LinearImage::new(albedo.width(), albedo.height(), albedo.channels(), data)
}
