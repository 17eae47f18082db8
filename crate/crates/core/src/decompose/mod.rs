//! Albedo recovery from lit/shadow pairs.
//!
//! Under `I = R ⊙ (φ ⊙ S_sun + S_sky)`, two nearby pixels with the same
//! albedo on either side of a cast-shadow edge give one sample of the
//! sun-to-sky ratio φ per channel. A two-component Gaussian mixture separates
//! the tight cluster of valid samples from outlier pairs, and the cluster
//! mean fixes φ, after which albedo follows pixel-wise.

mod albedo;
mod confidence;
mod gmm;
mod pairs;

pub use albedo::{compose_image, extract_shading, recombine, recover_albedo, DEFAULT_EPS_DENOMINATOR};
pub use confidence::{build_confidence_mask, mesh_boundary, shadow_boundary, DEFAULT_DILATION_RADIUS};
pub use gmm::{fit_phi_gmm, fit_two_component, ChannelFit, GmmConfig, SunSkyRatio};
pub use pairs::{detect_lit_shadow_pairs, phi_per_pair, phi_samples, LitShadowPair, PairFilterConfig};
