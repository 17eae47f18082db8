use rand::Rng;

use super::sampling::{cosine_hemisphere, pixel_rng, Stream};
use super::{CameraModel, TriangleMesh, Vec3};
use crate::imagecore::BinaryMask;
use crate::{par, Error, LinearImage, Result};

/// Lower bound on hemisphere samples per pixel.
pub const MIN_SKY_SAMPLES: usize = 16;

/// Per-pixel geometric layers for one view, row-major.
#[derive(Debug, Clone)]
pub struct GeometryBuffers {
    pub width: usize,
    pub height: usize,
    /// Distance along the optical axis, metres; 0 where the ray missed.
    pub depth: Vec<f64>,
    /// Unit world-frame normal facing the camera; zero where missed.
    pub normal: Vec<Vec3>,
    /// World-space hit point; zero where missed.
    pub position: Vec<Vec3>,
    /// Hit triangle id, `u32::MAX` where missed.
    pub triangle: Vec<u32>,
    pub hit: BinaryMask,
    pub sun_visibility: Option<BinaryMask>,
    pub sky_visibility: Option<Vec<f32>>,
}

impl GeometryBuffers {
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn is_hit(&self, p: usize) -> bool {
        self.hit.at(p)
    }

    pub fn depth_image(&self) -> LinearImage {
        LinearImage::new(
            self.width,
            self.height,
            1,
            self.depth.iter().map(|&d| d as f32).collect(),
        )
        .expect("depths are finite and non-negative")
    }

    /// Normals encoded as `(n + 1) / 2` so they fit a non-negative raster.
    pub fn normal_image(&self) -> LinearImage {
        let data = self
            .normal
            .iter()
            .zip(self.hit.bits())
            .flat_map(|(n, &h)| {
                let e = if h { (n.map(|c| c + 1.0)) * 0.5 } else { Vec3::zeros() };
                [e.x as f32, e.y as f32, e.z as f32]
            })
            .collect();
        LinearImage::new(self.width, self.height, 3, data).expect("encoded normals lie in [0, 1]")
    }
}

/// Casts one primary ray through each pixel centre.
pub fn render_geometry(mesh: &TriangleMesh, cam: &CameraModel) -> GeometryBuffers {
    let (w, h) = (cam.width, cam.height);
    let origin = cam.center();
    let hits: Vec<Option<(f64, Vec3, Vec3, u32)>> = par::map_indices(w * h, |p| {
        let dir = cam.pixel_ray(p % w, p / w);
        mesh.intersect(&origin, &dir, 0.0, f64::INFINITY).map(|hit| {
            let mut n = mesh.normal(hit.triangle);
            if n.dot(&dir) > 0.0 {
                n = -n;
            }
            (hit.t, n, origin + dir * hit.t, hit.triangle)
        })
    });
    let mut buf = GeometryBuffers {
        width: w,
        height: h,
        depth: vec![0.0; w * h],
        normal: vec![Vec3::zeros(); w * h],
        position: vec![Vec3::zeros(); w * h],
        triangle: vec![u32::MAX; w * h],
        hit: BinaryMask::filled(w, h, false),
        sun_visibility: None,
        sky_visibility: None,
    };
    let mut bits = vec![false; w * h];
    for (p, hit) in hits.into_iter().enumerate() {
        if let Some((t, n, pos, tri)) = hit {
            buf.depth[p] = t;
            buf.normal[p] = n;
            buf.position[p] = pos;
            buf.triangle[p] = tri;
            bits[p] = true;
        }
    }
    buf.hit = BinaryMask::new(w, h, bits).expect("sized to the camera");
    buf
}

fn checked_unit(dir: &Vec3) -> Result<Vec3> {
    let len = dir.norm();
    if !len.is_finite() || (len - 1.0).abs() >= 1e-3 {
        return Err(Error::invalid(format!("sun direction has norm {len}, expected 1")));
    }
    if (len - 1.0).abs() > 1e-9 {
        log::warn!("renormalizing sun direction with norm {len}");
    }
    Ok(dir / len)
}

/// Cast-shadow mask with the mesh's default ray offset.
pub fn compute_sun_visibility(
    mesh: &TriangleMesh,
    buffers: &GeometryBuffers,
    sun_dir: &Vec3,
) -> Result<BinaryMask> {
    compute_sun_visibility_with_offset(mesh, buffers, sun_dir, mesh.default_ray_offset())
}

/// A pixel sees the sun iff it faces the sun (`n · s > 0`) and a ray from the
/// surface point, lifted by `offset` along the normal, escapes the mesh.
pub fn compute_sun_visibility_with_offset(
    mesh: &TriangleMesh,
    buffers: &GeometryBuffers,
    sun_dir: &Vec3,
    offset: f64,
) -> Result<BinaryMask> {
    let sun = checked_unit(sun_dir)?;
    let bits = par::map_indices(buffers.pixel_count(), |p| {
        if !buffers.is_hit(p) {
            return false;
        }
        let n = buffers.normal[p];
        if n.dot(&sun) <= 0.0 {
            return false;
        }
        let origin = buffers.position[p] + n * offset;
        !mesh.occluded(&origin, &sun, 0.0, f64::INFINITY)
    });
    BinaryMask::new(buffers.width, buffers.height, bits)
}

/// Fraction of the horizon-clipped upper hemisphere that is unoccluded,
/// estimated with `samples` cosine-weighted (about world up) directions per
/// pixel. Missed pixels read 0.
pub fn compute_sky_visibility(
    mesh: &TriangleMesh,
    buffers: &GeometryBuffers,
    samples: usize,
    seed: u64,
) -> Result<Vec<f32>> {
    if samples < MIN_SKY_SAMPLES {
        return Err(Error::invalid(format!(
            "sky sampling needs at least {MIN_SKY_SAMPLES} samples, got {samples}"
        )));
    }
    let offset = mesh.default_ray_offset();
    Ok(par::map_indices(buffers.pixel_count(), |p| {
        if !buffers.is_hit(p) {
            return 0.0;
        }
        let origin = buffers.position[p] + buffers.normal[p] * offset;
        let mut rng = pixel_rng(seed, Stream::SkyVisibility, p);
        let open = (0..samples)
            .filter(|_| {
                let dir = cosine_hemisphere(rng.random(), rng.random());
                !mesh.occluded(&origin, &dir, 0.0, f64::INFINITY)
            })
            .count();
        (open as f64 / samples as f64) as f32
    }))
}
