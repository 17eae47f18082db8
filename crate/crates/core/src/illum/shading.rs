
use super::{SkyDome, SunPosition};
use crate::geometry::sampling::{cosine_hemisphere, pixel_rng, rotated_hammersley, Frame, Stream};
use crate::geometry::{GeometryBuffers, TriangleMesh, Vec3, MIN_SKY_SAMPLES};
use crate::imagecore::BinaryMask;
use crate::{par, Error, LinearImage, Result};

/// Normalized sun and sky shading for one view.
///
/// `s_sun = V_sun · ⟨n, sun⟩⁺` lies in [0, 1]. `s_sky` is the cosine-weighted
/// sky integral scaled by 1/π, so an open, up-facing surface reads 1 under a
/// uniform sky. Both are zero outside `valid`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadingMaps {
    pub width: usize,
    pub height: usize,
    pub s_sun: Vec<f32>,
    pub s_sky: Vec<f32>,
    pub valid: BinaryMask,
}

impl ShadingMaps {
    pub fn new(s_sun: Vec<f32>, s_sky: Vec<f32>, valid: BinaryMask) -> Result<Self> {
        let n = valid.width() * valid.height();
        if s_sun.len() != n || s_sky.len() != n {
            return Err(Error::DimensionMismatch("shading maps and mask differ in size".into()));
        }
        let zero_outside = |v: &[f32]| v.iter().zip(valid.bits()).all(|(s, &ok)| ok || *s == 0.0);
        if !zero_outside(&s_sun) || !zero_outside(&s_sky) {
            return Err(Error::invalid("shading must be zero outside the valid mask"));
        }
        Ok(Self {
            width: valid.width(),
            height: valid.height(),
            s_sun,
            s_sky,
            valid,
        })
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn sun_image(&self) -> LinearImage {
        LinearImage::new(self.width, self.height, 1, self.s_sun.clone()).expect("valid shading")
    }

    pub fn sky_image(&self) -> LinearImage {
        LinearImage::new(self.width, self.height, 1, self.s_sky.clone()).expect("valid shading")
    }
}

/// `S_sun(p) = V_sun(p) · max(0, n(p) · sun)`.
pub fn compute_sun_shading(
    buffers: &GeometryBuffers,
    sun_visibility: &BinaryMask,
    sun: &SunPosition,
) -> Vec<f32> {
    let d = sun.direction;
    par::map_indices(buffers.pixel_count(), |p| {
        if buffers.is_hit(p) && sun_visibility.at(p) {
            buffers.normal[p].dot(&d).clamp(0.0, 1.0) as f32
        } else {
            0.0
        }
    })
}

/// Monte Carlo estimate of `(1/π) ∫ V(ω) G(ω) ⟨n, ω⟩⁺ dω` over the upper
/// hemisphere. Directions are cosine-distributed about the normal (rotated
/// Hammersley, one shift per pixel), so the estimator is the mean of
/// `V · G · [ω above horizon]`.
fn sky_integral(
    mesh: &TriangleMesh,
    buffers: &GeometryBuffers,
    samples: usize,
    seed: u64,
    radiance: impl Fn(&Vec3) -> f64 + Sync + Send,
) -> Result<Vec<f32>> {
    if samples < MIN_SKY_SAMPLES {
        return Err(Error::invalid(format!(
            "sky shading needs at least {MIN_SKY_SAMPLES} samples, got {samples}"
        )));
    }
    let offset = mesh.default_ray_offset();
    Ok(par::map_indices(buffers.pixel_count(), |p| {
        if !buffers.is_hit(p) {
            return 0.0;
        }
        let n = buffers.normal[p];
        let frame = Frame::from_normal(&n);
        let origin = buffers.position[p] + n * offset;
        let mut rng = pixel_rng(seed, Stream::SkyShading, p);
        let sum: f64 = rotated_hammersley(samples, &mut rng)
            .map(|(u1, u2)| {
                let dir = frame.to_world(&cosine_hemisphere(u1, u2));
                if dir.z <= 0.0 || mesh.occluded(&origin, &dir, 0.0, f64::INFINITY) {
                    0.0
                } else {
                    radiance(&dir)
                }
            })
            .sum();
        (sum / samples as f64) as f32
    }))
}

/// Sky shading under a uniform sky (`G ≡ 1`).
pub fn compute_sky_shading_uniform(
    mesh: &TriangleMesh,
    buffers: &GeometryBuffers,
    samples: usize,
    seed: u64,
) -> Result<Vec<f32>> {
    sky_integral(mesh, buffers, samples, seed, |_| 1.0)
}

/// Sky shading with `G = gain · dome(ω)`. Uses the same directions as the
/// uniform estimator for the same seed.
pub fn compute_sky_shading_measured(
    mesh: &TriangleMesh,
    buffers: &GeometryBuffers,
    dome: &SkyDome,
    samples: usize,
    seed: u64,
) -> Result<Vec<f32>> {
    let gain = dome.gain.ok_or(Error::UnalignedDome)?;
    sky_integral(mesh, buffers, samples, seed, |d| gain * dome.sample(d))
}

/// Least-squares gain mapping a raw measured-sky shading map onto the
/// uniform-sky one: `argmin_g Σ (g·m − u)² = ⟨m, u⟩ / ⟨m, m⟩` over `valid`.
pub fn align_sky_dome(uniform: &[f32], measured_raw: &[f32], valid: &BinaryMask) -> Result<f64> {
    if uniform.len() != measured_raw.len() || uniform.len() != valid.bits().len() {
        return Err(Error::DimensionMismatch("alignment inputs differ in size".into()));
    }
    let count = valid.count();
    if count < 100 {
        return Err(Error::TooFewSamples { got: count, need: 100 });
    }
    let (mut mu, mut mm) = (0.0f64, 0.0f64);
    for ((&u, &m), &ok) in uniform.iter().zip(measured_raw).zip(valid.bits()) {
        if ok {
            mu += m as f64 * u as f64;
            mm += m as f64 * m as f64;
        }
    }
    if mm == 0.0 {
        return Err(Error::Degenerate("measured sky shading is zero on every valid pixel".into()));
    }
    let gain = mu / mm;
    if !(gain > 0.0) {
        return Err(Error::Degenerate(format!("non-positive alignment gain {gain}")));
    }
    Ok(gain)
}
