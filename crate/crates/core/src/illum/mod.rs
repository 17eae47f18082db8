//! Light sources: sun position, normalized sun/sky shading, measured sky
//! domes and their HDR capture.

mod dome;
mod hdr;
mod shading;
mod sun;

pub use dome::{fisheye_to_equirect, render_fisheye, FisheyeCalibration, SkyDome};
pub use hdr::{merge_hdr, ExposureStack, DEFAULT_FLOOR, DEFAULT_SATURATION};
pub use shading::{
    align_sky_dome, compute_sky_shading_measured, compute_sky_shading_uniform, compute_sun_shading,
    ShadingMaps,
};
pub use sun::{sun_direction, SunPosition};
