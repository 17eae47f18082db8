//! Hemisphere sampling and per-pixel random streams.
//!
//! Every pixel draws from its own ChaCha stream keyed by `(seed, purpose,
//! pixel index)`, so results do not depend on evaluation order or thread
//! count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Vec3;

/// Stream purposes; distinct so different estimators never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    SkyVisibility = 1,
    SkyShading = 2,
}

pub fn pixel_rng(seed: u64, stream: Stream, pixel: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (stream as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(pixel as u64);
    rng
}

/// Cosine-weighted direction about +z from two uniforms in [0, 1).
#[inline]
pub fn cosine_hemisphere(u1: f64, u2: f64) -> Vec3 {
    let r = u1.sqrt();
    let phi = 2.0 * PI * u2;
    Vec3::new(r * phi.cos(), r * phi.sin(), (1.0 - u1).max(0.0).sqrt())
}

/// Orthonormal basis with `w` as the third axis.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    u: Vec3,
    v: Vec3,
    w: Vec3,
}

impl Frame {
    pub fn from_normal(n: &Vec3) -> Self {
        // Duff et al. branchless basis
        let sign = 1.0f64.copysign(n.z);
        let a = -1.0 / (sign + n.z);
        let b = n.x * n.y * a;
        let u = Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x);
        let v = Vec3::new(b, sign + n.y * n.y * a, -n.y);
        Self { u, v, w: *n }
    }

    #[inline]
    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.u * local.x + self.v * local.y + self.w * local.z
    }
}

fn radical_inverse_base2(mut i: u32) -> f64 {
    i = i.reverse_bits();
    i as f64 * (1.0 / 4_294_967_296.0)
}

/// `count` points of a Hammersley set under a random toroidal shift
/// (Cranley–Patterson rotation). Unbiased, with much lower variance than
/// independent draws for smooth integrands.
pub fn rotated_hammersley(count: usize, rng: &mut impl Rng) -> impl Iterator<Item = (f64, f64)> {
    let shift_a: f64 = rng.random();
    let shift_b: f64 = rng.random();
    let n = count as f64;
    (0..count).map(move |i| {
        let a = ((i as f64 + 0.5) / n + shift_a).fract();
        let b = (radical_inverse_base2(i as u32) + shift_b).fract();
        (a, b)
    })
}
