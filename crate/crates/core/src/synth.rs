//! Parametric ground-plane-and-boxes scenes with known albedo, geometry and
//! sun-to-sky ratio, rendered through the forward model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::{compose_image, SunSkyRatio};
use crate::geometry::{
    compute_sun_visibility, render_geometry, CameraModel, GeometryBuffers, TriangleMesh, Vec3,
};
use crate::illum::{compute_sky_shading_uniform, compute_sun_shading, ShadingMaps, SunPosition};
use crate::{Error, LinearImage, Result};

/// Axis-aligned box resting on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    /// Footprint centre (east, north), metres.
    pub center: [f64; 2],
    /// Extent along east, north and up, metres.
    pub size: [f64; 3],
    /// Albedo for every face; random per face when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub albedo: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraRigSpec {
    pub count: usize,
    pub width: usize,
    pub height: usize,
    /// Focal length in pixels.
    pub focal: f64,
    /// Horizontal distance of each camera from the scene centre.
    pub radius: f64,
    pub altitude: f64,
    /// Azimuth of the first camera, degrees clockwise from north; the rest
    /// are spread evenly around the circle.
    pub first_azimuth: f64,
}

impl Default for CameraRigSpec {
    fn default() -> Self {
        Self {
            count: 3,
            width: 683,
            height: 455,
            focal: 800.0,
            radius: 30.0,
            altitude: 70.0,
            first_azimuth: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub seed: u64,
    /// Side of the square ground plane centred on the origin, metres.
    pub plane_size: f64,
    /// Side of one checkerboard cell, metres.
    pub checker_size: f64,
    /// The two alternating checkerboard colours.
    pub checker_albedo: [[f64; 3]; 2],
    /// Per-cell multiplicative albedo jitter, drawn from `[1 - j, 1 + j]`.
    pub albedo_jitter: f64,
    pub boxes: Vec<BoxSpec>,
    pub sun_azimuth: f64,
    pub sun_elevation: f64,
    pub phi: [f64; 3],
    pub cameras: CameraRigSpec,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            seed: 7,
            plane_size: 100.0,
            checker_size: 5.0,
            checker_albedo: [[0.55, 0.5, 0.42], [0.3, 0.34, 0.38]],
            albedo_jitter: 0.15,
            boxes: vec![
                BoxSpec {
                    center: [-8.0, 6.0],
                    size: [10.0, 14.0, 8.0],
                    albedo: None,
                },
                BoxSpec {
                    center: [12.0, -8.0],
                    size: [12.0, 8.0, 11.0],
                    albedo: None,
                },
            ],
            sun_azimuth: 135.0,
            sun_elevation: 35.0,
            phi: [6.0, 5.0, 4.0],
            cameras: CameraRigSpec::default(),
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.plane_size) || !positive(self.checker_size) {
            return Err(Error::invalid("plane and checker sizes must be positive"));
        }
        if !(0.0..1.0).contains(&self.albedo_jitter) {
            return Err(Error::invalid("albedo jitter must lie in [0, 1)"));
        }
        let max_base = self.checker_albedo.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
        let min_base = self.checker_albedo.iter().flatten().fold(1.0f64, |m, &v| m.min(v));
        if !(min_base > 0.0) || max_base * (1.0 + self.albedo_jitter) > 1.0 {
            return Err(Error::invalid("checker albedo must stay within (0, 1] after jitter"));
        }
        if self.boxes.iter().any(|b| !b.size.iter().all(|&s| positive(s))) {
            return Err(Error::invalid("box sizes must be positive"));
        }
        if self.boxes.iter().flat_map(|b| b.albedo).flatten().any(|a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::invalid("box albedo must lie in (0, 1]"));
        }
        if !(self.sun_elevation > 0.0 && self.sun_elevation <= 90.0) {
            return Err(Error::invalid(format!(
                "sun elevation must be in (0, 90], got {}",
                self.sun_elevation
            )));
        }
        if !self.phi.iter().all(|&p| positive(p)) {
            return Err(Error::invalid("phi must be positive"));
        }
        let rig = &self.cameras;
        if rig.count == 0 || !positive(rig.focal) || !positive(rig.altitude) || rig.radius < 0.0 {
            return Err(Error::invalid("camera rig needs a positive count, focal length and altitude"));
        }
        Ok(())
    }
}

/// A built scene. Albedo is constant per triangle.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub spec: SceneSpec,
    pub mesh: TriangleMesh,
    pub albedo: Vec<[f64; 3]>,
    pub phi_true: [f64; 3],
    pub sun: SunPosition,
    pub cameras: Vec<CameraModel>,
}

/// Every layer of one rendered view.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub image: LinearImage,
    pub albedo: LinearImage,
    pub buffers: GeometryBuffers,
    pub shading: ShadingMaps,
}

fn element_rng(seed: u64, element: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(element);
    rng
}

fn push_quad(vertices: &mut Vec<Vec3>, triangles: &mut Vec<[u32; 3]>, corners: [Vec3; 4]) {
    let base = vertices.len() as u32;
    vertices.extend(corners);
    triangles.push([base, base + 1, base + 2]);
    triangles.push([base, base + 2, base + 3]);
}

pub fn build_scene(spec: &SceneSpec) -> Result<SyntheticScene> {
    spec.validate()?;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut albedo = Vec::new();

    let cells = (spec.plane_size / spec.checker_size).ceil() as usize;
    let half = spec.plane_size / 2.0;
    let mut rng = element_rng(spec.seed, 0);
    for j in 0..cells {
        for i in 0..cells {
            let x0 = -half + i as f64 * spec.checker_size;
            let y0 = -half + j as f64 * spec.checker_size;
            let x1 = (x0 + spec.checker_size).min(half);
            let y1 = (y0 + spec.checker_size).min(half);
            push_quad(
                &mut vertices,
                &mut triangles,
                [
                    Vec3::new(x0, y0, 0.0),
                    Vec3::new(x1, y0, 0.0),
                    Vec3::new(x1, y1, 0.0),
                    Vec3::new(x0, y1, 0.0),
                ],
            );
            let base = spec.checker_albedo[(i + j) % 2];
            let scale = 1.0 + spec.albedo_jitter * rng.random_range(-1.0..=1.0);
            let a = base.map(|v| v * scale);
            albedo.extend([a, a]);
        }
    }

    for (k, b) in spec.boxes.iter().enumerate() {
        let mut rng = element_rng(spec.seed, k as u64 + 1);
        let [cx, cy] = b.center;
        let [sx, sy, sz] = b.size;
        let (x0, x1, y0, y1) = (cx - sx / 2.0, cx + sx / 2.0, cy - sy / 2.0, cy + sy / 2.0);
        let v = |x, y, z| Vec3::new(x, y, z);
        let faces = [
            [v(x0, y0, sz), v(x1, y0, sz), v(x1, y1, sz), v(x0, y1, sz)],
            [v(x0, y0, 0.0), v(x1, y0, 0.0), v(x1, y0, sz), v(x0, y0, sz)],
            [v(x1, y0, 0.0), v(x1, y1, 0.0), v(x1, y1, sz), v(x1, y0, sz)],
            [v(x1, y1, 0.0), v(x0, y1, 0.0), v(x0, y1, sz), v(x1, y1, sz)],
            [v(x0, y1, 0.0), v(x0, y0, 0.0), v(x0, y0, sz), v(x0, y1, sz)],
        ];
        for face in faces {
            push_quad(&mut vertices, &mut triangles, face);
            let random: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.2..0.8));
            let a = b.albedo.unwrap_or(random);
            albedo.extend([a, a]);
        }
    }

    let mesh = TriangleMesh::new(vertices, triangles)?;
    if mesh.triangle_count() != albedo.len() {
        return Err(Error::Degenerate("scene produced degenerate triangles".into()));
    }
    if spec.boxes.is_empty() {
        log::warn!("scene has no boxes, so no cast shadows");
    }

    let rig = &spec.cameras;
    let cameras = (0..rig.count)
        .map(|i| {
            let az = (rig.first_azimuth + 360.0 * i as f64 / rig.count as f64).to_radians();
            let eye = Vec3::new(rig.radius * az.sin(), rig.radius * az.cos(), rig.altitude);
            let up = if rig.radius > 0.0 { Vec3::z() } else { Vec3::y() };
            CameraModel::look_at(eye, Vec3::zeros(), up, rig.focal, rig.width, rig.height)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SyntheticScene {
        spec: spec.clone(),
        mesh,
        albedo,
        phi_true: spec.phi,
        sun: SunPosition::from_angles(spec.sun_azimuth, spec.sun_elevation)?,
        cameras,
    })
}

impl SyntheticScene {
    /// Same scene with one more box, leaving existing albedo untouched.
    pub fn with_box(&self, b: BoxSpec) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.boxes.push(b);
        let mut scene = build_scene(&spec)?;
        scene.sun = self.sun;
        scene.cameras = self.cameras.clone();
        Ok(scene)
    }

    /// Same scene lit from another direction.
    pub fn with_sun(&self, sun: SunPosition) -> Result<Self> {
        if !(sun.elevation > 0.0) {
            return Err(Error::invalid("synthetic scenes need the sun above the horizon"));
        }
        let mut scene = self.clone();
        scene.sun = sun;
        scene.spec.sun_azimuth = sun.azimuth;
        scene.spec.sun_elevation = sun.elevation;
        Ok(scene)
    }

    pub fn albedo_of(&self, triangle: u32) -> [f64; 3] {
        self.albedo[triangle as usize]
    }

    pub fn camera(&self, index: usize) -> Result<&CameraModel> {
        self.cameras
            .get(index)
            .ok_or_else(|| Error::invalid(format!("camera {index} out of range ({} cameras)", self.cameras.len())))
    }

    /// Albedo raster for a view; zero where the ray missed.
    pub fn albedo_image(&self, buffers: &GeometryBuffers) -> LinearImage {
        let data = buffers
            .triangle
            .iter()
            .flat_map(|&t| match t {
                u32::MAX => [0.0; 3],
                t => self.albedo_of(t).map(|v| v as f32),
            })
            .collect();
        LinearImage::new(buffers.width, buffers.height, 3, data).expect("albedo within (0, 1]")
    }
}

/// Sun visibility, sun shading and uniform-sky shading for a view.
pub fn shade_view(
    mesh: &TriangleMesh,
    buffers: &mut GeometryBuffers,
    sun: &SunPosition,
    sky_samples: usize,
    seed: u64,
) -> Result<ShadingMaps> {
    let visibility = compute_sun_visibility(mesh, buffers, &sun.direction)?;
    let s_sun = compute_sun_shading(buffers, &visibility, sun);
    let s_sky = compute_sky_shading_uniform(mesh, buffers, sky_samples, seed)?;
    buffers.sun_visibility = Some(visibility);
    ShadingMaps::new(s_sun, s_sky, buffers.hit.clone())
}

/// Renders view `cam_index`: `I = R ⊙ (φ·S_sun + S_sky)`.
pub fn render_ground_truth(
    scene: &SyntheticScene,
    cam_index: usize,
    sky_samples: usize,
    seed: u64,
) -> Result<GroundTruth> {
    let cam = scene.camera(cam_index)?;
    let mut buffers = render_geometry(&scene.mesh, cam);
    let shading = shade_view(&scene.mesh, &mut buffers, &scene.sun, sky_samples, seed)?;
    let albedo = scene.albedo_image(&buffers);
    let image = compose_image(&albedo, &SunSkyRatio::fixed(scene.phi_true.to_vec()), &shading)?;
    Ok(GroundTruth {
        image,
        albedo,
        buffers,
        shading,
    })
}
