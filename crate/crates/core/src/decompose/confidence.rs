use crate::geometry::GeometryBuffers;
use crate::imagecore::BinaryMask;

pub const DEFAULT_DILATION_RADIUS: usize = 3;

/// Shadowed hit pixels with a lit hit pixel among their 4-neighbours.
pub fn shadow_boundary(sun_visibility: &BinaryMask, hit: &BinaryMask) -> BinaryMask {
    sun_visibility.not().boundary_against(sun_visibility, hit)
}

/// Pixels whose depth jumps against a 4-neighbour, plus hit pixels touching
/// a miss.
///
/// The jump threshold is 3× the median absolute depth difference between
/// neighbouring hit pixels, floored at 1e-4 of the median depth so that flat
/// fronto-parallel surfaces do not trip on rounding noise.
pub fn mesh_boundary(buffers: &GeometryBuffers) -> BinaryMask {
    let (w, h) = (buffers.width, buffers.height);
    let hit = &buffers.hit;
    let mut diffs = Vec::new();
    let mut depths = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            if !hit.at(p) {
                continue;
            }
            depths.push(buffers.depth[p]);
            if x + 1 < w && hit.at(p + 1) {
                diffs.push((buffers.depth[p] - buffers.depth[p + 1]).abs());
            }
            if y + 1 < h && hit.at(p + w) {
                diffs.push((buffers.depth[p] - buffers.depth[p + w]).abs());
            }
        }
    }
    let median = |v: &mut Vec<f64>| -> f64 {
        if v.is_empty() {
            return 0.0;
        }
        let k = v.len() / 2;
        *v.select_nth_unstable_by(k, f64::total_cmp).1
    };
    let threshold = (3.0 * median(&mut diffs)).max(1e-4 * median(&mut depths));
    BinaryMask::from_fn(w, h, |x, y| {
        let p = y * w + x;
        if !hit.at(p) {
            return false;
        }
        crate::imagecore::neighbours4(x, y, w, h).any(|(nx, ny)| {
            let q = ny * w + nx;
            !hit.at(q) || (buffers.depth[p] - buffers.depth[q]).abs() > threshold
        })
    })
}

/// Confident pixels: hit, and farther than `dilation_radius` from both the
/// shadow boundary and the mesh-boundary / geometric-error region.
pub fn build_confidence_mask(
    buffers: &GeometryBuffers,
    sun_visibility: &BinaryMask,
    mesh_boundary: &BinaryMask,
    dilation_radius: usize,
) -> BinaryMask {
    let shadow_edge = shadow_boundary(sun_visibility, &buffers.hit);
    buffers
        .hit
        .and_not(&shadow_edge.dilate(dilation_radius))
        .and_not(&mesh_boundary.dilate(dilation_radius))
}
