//! Outdoor intrinsic image decomposition under a sun/sky illumination model.
//!
//! Given a linear radiance image, the scene mesh and camera, and the sun
//! direction, the pipeline renders geometric buffers, evaluates normalized
//! sun and sky shading, estimates the per-channel sun-to-sky ratio from
//! lit/shadow pixel pairs and recovers albedo:
//!
//! ```text
//! I = R ⊙ (φ ⊙ S_sun + S_sky)
//! ```
//!
//! Supporting modules cover HDR sky-dome capture, albedo-based change
//! detection, full-reference metrics and a synthetic scene generator that
//! renders ground truth through the same forward model.

pub mod changedet;
pub mod decompose;
pub mod error;
pub mod geometry;
pub mod illum;
pub mod imagecore;
pub mod metrics;
pub mod par;
pub mod synth;

pub use error::{Error, Result};
pub use imagecore::{BinaryMask, LinearImage};
