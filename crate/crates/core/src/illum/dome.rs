use std::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::{Mat3, Vec3};
use crate::{Error, LinearImage, Result};

/// Equirectangular sky luminance. Column `x` spans azimuth 0–360°
/// (clockwise from north, i.e. east of north), row `y` spans elevation +90°
/// at the top to −90° at the bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct SkyDome {
    pub equirect: LinearImage,
    /// Scale to the uniform-sky model; `None` until aligned.
    pub gain: Option<f64>,
}

impl SkyDome {
    pub fn new(equirect: LinearImage) -> Result<Self> {
        if equirect.channels() != 1 {
            return Err(Error::ChannelCount(equirect.channels()));
        }
        Ok(Self { equirect, gain: None })
    }

    pub fn with_gain(mut self, gain: f64) -> Result<Self> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::invalid(format!("dome gain must be positive, got {gain}")));
        }
        self.gain = Some(gain);
        Ok(self)
    }

    /// Bilinear luminance toward world direction `dir` (need not be unit).
    /// Wraps in azimuth, clamps in elevation.
    pub fn sample(&self, dir: &Vec3) -> f64 {
        let img = &self.equirect;
        let (w, h) = (img.width() as f64, img.height() as f64);
        let len = dir.norm();
        let azimuth = dir.x.atan2(dir.y).rem_euclid(2.0 * PI);
        let elevation = (dir.z / len).clamp(-1.0, 1.0).asin();
        let fx = azimuth / (2.0 * PI) * w - 0.5;
        let fy = ((FRAC_PI_2 - elevation) / PI * h - 0.5).clamp(0.0, h - 1.0);
        let x0 = fx.floor();
        let tx = fx - x0;
        let y0 = fy.floor();
        let ty = fy - y0;
        let wrap = |x: f64| x.rem_euclid(w) as usize;
        let (xa, xb) = (wrap(x0), wrap(x0 + 1.0));
        let ya = y0 as usize;
        let yb = (ya + 1).min(img.height() - 1);
        let v = |x: usize, y: usize| img.get(x, y, 0) as f64;
        let top = v(xa, ya) * (1.0 - tx) + v(xb, ya) * tx;
        let bot = v(xa, yb) * (1.0 - tx) + v(xb, yb) * tx;
        top * (1.0 - ty) + bot * ty
    }

    /// World direction at the centre of equirect pixel `(x, y)`.
    pub fn pixel_direction(&self, x: usize, y: usize) -> Vec3 {
        equirect_direction(x, y, self.equirect.width(), self.equirect.height())
    }
}

fn equirect_direction(x: usize, y: usize, w: usize, h: usize) -> Vec3 {
    let az = (x as f64 + 0.5) / w as f64 * 2.0 * PI;
    let el = FRAC_PI_2 - (y as f64 + 0.5) / h as f64 * PI;
    Vec3::new(az.sin() * el.cos(), az.cos() * el.cos(), el.sin())
}

/// Equidistant fisheye (`r = f·θ`) intrinsics and orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct FisheyeCalibration {
    /// Pixels per radian.
    pub focal: f64,
    /// Optical centre in continuous pixel coordinates (pixel centres at +0.5).
    pub center: (f64, f64),
    /// Fisheye camera frame to world. Camera +z is the optical axis; image x
    /// grows with camera +x, image y with camera +y.
    pub rotation: Mat3,
}

impl FisheyeCalibration {
    fn world_to_pixel(&self, dir: &Vec3) -> Option<(f64, f64)> {
        let c = self.rotation.transpose() * dir.normalize();
        let theta = c.z.clamp(-1.0, 1.0).acos();
        if theta > FRAC_PI_2 {
            return None;
        }
        let alpha = c.y.atan2(c.x);
        let r = self.focal * theta;
        Some((self.center.0 + r * alpha.cos(), self.center.1 + r * alpha.sin()))
    }

    fn pixel_to_world(&self, px: f64, py: f64) -> Option<Vec3> {
        let (dx, dy) = (px - self.center.0, py - self.center.1);
        let theta = (dx * dx + dy * dy).sqrt() / self.focal;
        if theta > FRAC_PI_2 {
            return None;
        }
        let alpha = dy.atan2(dx);
        let c = Vec3::new(theta.sin() * alpha.cos(), theta.sin() * alpha.sin(), theta.cos());
        Some(self.rotation * c)
    }
}

/// Bilinear lookup at continuous pixel coordinates; zero outside the image.
fn bilinear(img: &LinearImage, px: f64, py: f64) -> f64 {
    let (fx, fy) = (px - 0.5, py - 0.5);
    let (w, h) = (img.width() as f64, img.height() as f64);
    if fx < -0.5 || fy < -0.5 || fx > w - 0.5 || fy > h - 0.5 {
        return 0.0;
    }
    let fx = fx.clamp(0.0, w - 1.0);
    let fy = fy.clamp(0.0, h - 1.0);
    let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(img.width() - 1), (y0 + 1).min(img.height() - 1));
    let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
    let v = |x, y| img.get(x, y, 0) as f64;
    (v(x0, y0) * (1.0 - tx) + v(x1, y0) * tx) * (1.0 - ty) + (v(x0, y1) * (1.0 - tx) + v(x1, y1) * tx) * ty
}

/// Reprojects an all-sky fisheye image to an equirectangular dome of
/// `out_width x out_height`. Three-channel inputs are reduced to Rec. 709
/// luminance. Below-horizon pixels and directions outside the lens's 180°
/// field are zero.
pub fn fisheye_to_equirect(
    img: &LinearImage,
    calib: &FisheyeCalibration,
    out_width: usize,
    out_height: usize,
) -> Result<SkyDome> {
    let (cx, cy) = calib.center;
    if !(cx >= 0.0 && cy >= 0.0 && cx <= img.width() as f64 && cy <= img.height() as f64) {
        return Err(Error::invalid(format!("fisheye centre ({cx}, {cy}) outside the image")));
    }
    if !(calib.focal > 0.0) {
        return Err(Error::invalid("fisheye focal length must be positive"));
    }
    if out_width == 0 || out_height == 0 {
        return Err(Error::invalid("dome size must be non-zero"));
    }
    let lum = crate::imagecore::luminance(img)?;
    let equirect = LinearImage::from_rows(out_width, out_height, 1, |y, line| {
        for (x, out) in line.iter_mut().enumerate() {
            let dir = equirect_direction(x, y, out_width, out_height);
            *out = if dir.z < 0.0 {
                0.0
            } else {
                calib
                    .world_to_pixel(&dir)
                    .map(|(px, py)| bilinear(&lum, px, py))
                    .unwrap_or(0.0) as f32
            };
        }
    })?;
    SkyDome::new(equirect)
}

/// Forward fisheye model: renders `radiance(ω)` into a `width x height`
/// fisheye frame. Pixels outside the image circle are zero.
pub fn render_fisheye(
    calib: &FisheyeCalibration,
    width: usize,
    height: usize,
    radiance: impl Fn(&Vec3) -> f64 + Sync + Send,
) -> Result<LinearImage> {
    LinearImage::from_rows(width, height, 1, |y, line| {
        for (x, out) in line.iter_mut().enumerate() {
            *out = calib
                .pixel_to_world(x as f64 + 0.5, y as f64 + 0.5)
                .map(|d| radiance(&d).max(0.0))
                .unwrap_or(0.0) as f32;
        }
    })
}
