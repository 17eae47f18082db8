use serde::{Deserialize, Serialize};

use super::confidence::shadow_boundary;
use crate::geometry::GeometryBuffers;
use crate::illum::ShadingMaps;
use crate::imagecore::BinaryMask;
use crate::{par, LinearImage};

/// Filters applied when pairing shadow-edge pixels with lit neighbours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairFilterConfig {
    /// Pixels.
    pub boundary_search_radius: usize,
    /// Degrees between the two surface normals.
    pub max_normal_angle: f64,
    /// Metres.
    pub max_depth_diff: f64,
    /// Minimum per-channel radiance of the shadowed pixel. `None` uses 1% of
    /// the image's 99th-percentile radiance.
    pub min_shadow_brightness: Option<f64>,
    /// Fewest φ samples per channel accepted by the mixture fit.
    pub min_pairs: usize,
    /// Largest sky-shading difference across a pair.
    pub max_sky_diff: f64,
}

impl Default for PairFilterConfig {
    fn default() -> Self {
        Self {
            boundary_search_radius: 5,
            max_normal_angle: 18.0,
            max_depth_diff: 0.5,
            min_shadow_brightness: None,
            min_pairs: 50,
            max_sky_diff: 0.1,
        }
    }
}

impl PairFilterConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.boundary_search_radius > 0
            && self.max_normal_angle > 0.0
            && self.max_depth_diff > 0.0
            && self.min_shadow_brightness.is_none_or(|b| b > 0.0)
            && self.min_pairs > 0
            && self.max_sky_diff > 0.0;
        if ok {
            Ok(())
        } else {
            Err(crate::Error::invalid(format!("pair filter values must be positive: {self:?}")))
        }
    }
}

/// A shadowed pixel and its lit partner, assumed to share albedo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LitShadowPair {
    pub lit_pixel: (usize, usize),
    pub shadow_pixel: (usize, usize),
    pub i_lit: Vec<f64>,
    pub i_shadow: Vec<f64>,
    pub s_sun_lit: f64,
    pub s_sky_lit: f64,
    pub s_sky_shadow: f64,
}

fn brightness_threshold(img: &LinearImage, hit: &BinaryMask, cfg: &PairFilterConfig) -> f64 {
    if let Some(b) = cfg.min_shadow_brightness {
        return b;
    }
    let mut values: Vec<f32> = (0..img.pixel_count())
        .filter(|&p| hit.at(p))
        .flat_map(|p| (0..img.channels()).map(move |c| img.at(p, c)))
        .collect();
    if values.is_empty() {
        return f64::INFINITY;
    }
    let k = ((values.len() - 1) as f64 * 0.99).round() as usize;
    let (_, p99, _) = values.select_nth_unstable_by(k, f32::total_cmp);
    0.01 * *p99 as f64
}

/// Pairs every shadow-edge pixel with the nearest acceptable lit pixel.
///
/// Shadow-edge pixels are hit pixels without sun visibility that touch a lit
/// hit pixel (4-neighbourhood). Candidates within the search radius are
/// scanned nearest first; the first one that faces the sun and passes the
/// normal, depth and sky-shading filters is taken. Shadow pixels darker than
/// the brightness threshold in any channel are skipped.
///
/// Sun visibility comes from `buffers.sun_visibility`, or from `s_sun > 0`
/// when the buffers do not carry it.
pub fn detect_lit_shadow_pairs(
    img: &LinearImage,
    buffers: &GeometryBuffers,
    shading: &ShadingMaps,
    cfg: &PairFilterConfig,
) -> Vec<LitShadowPair> {
    let (w, h) = (buffers.width, buffers.height);
    let lit = match &buffers.sun_visibility {
        Some(v) => v.clone(),
        None => BinaryMask::new(w, h, shading.s_sun.iter().map(|&s| s > 0.0).collect())
            .expect("shading sized to buffers"),
    };
    let edge = shadow_boundary(&lit, &buffers.hit);
    let min_brightness = brightness_threshold(img, &buffers.hit, cfg);
    let cos_limit = cfg.max_normal_angle.to_radians().cos();

    let r = cfg.boundary_search_radius as isize;
    let mut offsets: Vec<(isize, isize)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| (dx, dy) != (0, 0) && dx * dx + dy * dy <= r * r)
        .collect();
    offsets.sort_by_key(|&(dx, dy)| (dx * dx + dy * dy, dy, dx));

    let channels = img.channels();
    let rows = par::map_indices(h, |y| {
        let mut found = Vec::new();
        for x in 0..w {
            let s = y * w + x;
            if !edge.at(s) {
                continue;
            }
            let i_shadow: Vec<f64> = (0..channels).map(|c| img.at(s, c) as f64).collect();
            if i_shadow.iter().any(|&v| v < min_brightness) {
                continue;
            }
            let n_s = buffers.normal[s];
            let partner = offsets.iter().find_map(|&(dx, dy)| {
                let (lx, ly) = (x as isize + dx, y as isize + dy);
                if lx < 0 || ly < 0 || lx >= w as isize || ly >= h as isize {
                    return None;
                }
                let l = ly as usize * w + lx as usize;
                let ok = buffers.hit.at(l)
                    && lit.at(l)
                    && shading.s_sun[l] > 0.0
                    && buffers.normal[l].dot(&n_s) >= cos_limit
                    && (buffers.depth[l] - buffers.depth[s]).abs() <= cfg.max_depth_diff
                    && ((shading.s_sky[l] - shading.s_sky[s]).abs() as f64) <= cfg.max_sky_diff;
                ok.then_some((lx as usize, ly as usize, l))
            });
            if let Some((lx, ly, l)) = partner {
                debug_assert!(lit.at(l) && !lit.at(s));
                found.push(LitShadowPair {
                    lit_pixel: (lx, ly),
                    shadow_pixel: (x, y),
                    i_lit: (0..channels).map(|c| img.at(l, c) as f64).collect(),
                    i_shadow: i_shadow.clone(),
                    s_sun_lit: shading.s_sun[l] as f64,
                    s_sky_lit: shading.s_sky[l] as f64,
                    s_sky_shadow: shading.s_sky[s] as f64,
                });
            }
        }
        found
    });
    rows.into_iter().flatten().collect()
}

/// `φ_c = S_sky · (I_lit,c − I_shadow,c) / (S_sun · I_shadow,c)` with sky
/// shading taken at the shadowed pixel. `None` when any channel is
/// non-finite or non-positive.
pub fn phi_per_pair(pair: &LitShadowPair) -> Option<Vec<f64>> {
    if !(pair.s_sun_lit > 0.0) {
        return None;
    }
    let phi: Vec<f64> = pair
        .i_lit
        .iter()
        .zip(&pair.i_shadow)
        .map(|(&lit, &shadow)| pair.s_sky_shadow * (lit - shadow) / (pair.s_sun_lit * shadow))
        .collect();
    phi.iter().all(|v| v.is_finite() && *v > 0.0).then_some(phi)
}

/// Accepted per-pair φ samples, in pair order.
pub fn phi_samples(pairs: &[LitShadowPair]) -> Vec<Vec<f64>> {
    pairs.iter().filter_map(phi_per_pair).collect()
}
