//! Scene geometry: triangle meshes, pinhole cameras and the per-view buffers
//! (depth, normals, sun and sky visibility) derived from them by ray casting.
//!
//! World frame is east-north-up (x east, y north, z up), metres.

mod buffers;
mod bvh;
mod camera;
mod mesh;
pub mod sampling;

pub use buffers::{
    compute_sky_visibility, compute_sun_visibility, compute_sun_visibility_with_offset,
    render_geometry, GeometryBuffers, MIN_SKY_SAMPLES,
};
pub use camera::{parse_camera_fields, read_camera_manifest, CameraModel, CAMERA_FIELD_COUNT};
pub use mesh::{Hit, TriangleMesh};

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

/// World up axis.
pub fn up() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}
