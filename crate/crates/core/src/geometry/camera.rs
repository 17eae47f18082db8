use std::path::Path;

use super::{Mat3, Vec3};
use crate::{Error, Result};

/// Undistorted pinhole camera.
///
/// Camera frame: x right, y down, z along the optical axis.
/// `x_cam = rotation * x_world + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub rotation: Mat3,
    pub translation: Vec3,
    pub width: usize,
    pub height: usize,
}

/// Numbers per camera record: fx fy cx cy, 9 rotation entries, 3 translation, width, height.
pub const CAMERA_FIELD_COUNT: usize = 18;

impl CameraModel {
    pub fn new(
        (fx, fy, cx, cy): (f64, f64, f64, f64),
        rotation: Mat3,
        translation: Vec3,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(Error::invalid(format!("focal lengths must be positive, got {fx}, {fy}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::invalid("camera resolution must be non-zero"));
        }
        let err = (rotation.transpose() * rotation - Mat3::identity()).amax();
        if !(err < 1e-6) {
            return Err(Error::invalid(format!("rotation is not orthonormal (error {err:e})")));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            rotation,
            translation,
            width,
            height,
        })
    }

    /// Camera at `eye` looking at `target`; `up` fixes the roll.
    pub fn look_at(
        eye: Vec3,
        target: Vec3,
        up: Vec3,
        focal: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let forward = (target - eye).try_normalize(1e-12).ok_or_else(|| Error::invalid("eye equals target"))?;
        let right = forward
            .cross(&up)
            .try_normalize(1e-12)
            .ok_or_else(|| Error::invalid("up is parallel to the view direction"))?;
        let down = forward.cross(&right);
        let rotation = Mat3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let translation = -(rotation * eye);
        Self::new(
            (focal, focal, width as f64 / 2.0, height as f64 / 2.0),
            rotation,
            translation,
            width,
            height,
        )
    }

    /// Camera centre in world coordinates.
    pub fn center(&self) -> Vec3 {
        -(self.rotation.transpose() * self.translation)
    }

    /// World-space direction through pixel `(x, y)`'s centre, scaled so its
    /// optical-axis component is 1: the ray parameter of a hit is its depth.
    pub fn pixel_ray(&self, x: usize, y: usize) -> Vec3 {
        let d = Vec3::new(
            (x as f64 + 0.5 - self.cx) / self.fx,
            (y as f64 + 0.5 - self.cy) / self.fy,
            1.0,
        );
        self.rotation.transpose() * d
    }

    /// Projects a world point to continuous pixel coordinates (pixel centres
    /// at half-integers). `None` behind the camera.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64)> {
        let c = self.rotation * p + self.translation;
        if c.z <= 0.0 {
            return None;
        }
        Some((self.fx * c.x / c.z + self.cx, self.fy * c.y / c.z + self.cy))
    }

    /// The same camera at `1/factor` resolution, matching [`downsample_box`]:
    /// output pixel `i` covers source pixels `[i·factor, (i+1)·factor)`.
    ///
    /// [`downsample_box`]: crate::imagecore::downsample_box
    pub fn downscaled(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::invalid("downsample factor must be >= 1"));
        }
        let f = factor as f64;
        Self::new(
            (self.fx / f, self.fy / f, self.cx / f, self.cy / f),
            self.rotation,
            self.translation,
            self.width.div_ceil(factor),
            self.height.div_ceil(factor),
        )
    }

    /// Applies a rigid world transform `x' = r x + t` to the camera pose.
    pub fn transformed(&self, r: &Mat3, t: &Vec3) -> Result<Self> {
        // x_cam = R x + T with x = r^T (x' - t)
        let rotation = self.rotation * r.transpose();
        let translation = self.translation - rotation * t;
        Self::new((self.fx, self.fy, self.cx, self.cy), rotation, translation, self.width, self.height)
    }

    /// Formats the 18 record fields, in manifest order.
    pub fn to_fields(&self) -> Vec<String> {
        let mut out = vec![
            format!("{:?}", self.fx),
            format!("{:?}", self.fy),
            format!("{:?}", self.cx),
            format!("{:?}", self.cy),
        ];
        for r in 0..3 {
            for c in 0..3 {
                out.push(format!("{:?}", self.rotation[(r, c)]));
            }
        }
        for i in 0..3 {
            out.push(format!("{:?}", self.translation[i]));
        }
        out.push(self.width.to_string());
        out.push(self.height.to_string());
        out
    }
}

/// Parses `fx fy cx cy r00 .. r22 tx ty tz width height`.
pub fn parse_camera_fields(fields: &[&str]) -> Result<CameraModel> {
    if fields.len() != CAMERA_FIELD_COUNT {
        return Err(Error::invalid(format!(
            "camera record needs {CAMERA_FIELD_COUNT} fields, got {}",
            fields.len()
        )));
    }
    let num = |i: usize| -> Result<f64> {
        fields[i]
            .parse::<f64>()
            .map_err(|e| Error::invalid(format!("field {i} ({}): {e}", fields[i])))
    };
    let int = |i: usize| -> Result<usize> {
        fields[i]
            .parse::<usize>()
            .map_err(|e| Error::invalid(format!("field {i} ({}): {e}", fields[i])))
    };
    let mut rot = [0.0; 9];
    for (k, slot) in rot.iter_mut().enumerate() {
        *slot = num(4 + k)?;
    }
    CameraModel::new(
        (num(0)?, num(1)?, num(2)?, num(3)?),
        Mat3::from_row_slice(&rot),
        Vec3::new(num(13)?, num(14)?, num(15)?),
        int(16)?,
        int(17)?,
    )
}

/// Reads a plain-text camera manifest: one `id` + 18 numbers per line,
/// whitespace separated; blank lines and `#` comments are skipped.
pub fn read_camera_manifest(path: impl AsRef<Path>) -> Result<Vec<(String, CameraModel)>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let cam = parse_camera_fields(&fields[1..]).map_err(|e| Error::Parse {
            location: format!("{}:{}", path.display(), lineno + 1),
            message: e.to_string(),
        })?;
        out.push((fields[0].to_string(), cam));
    }
    Ok(out)
}
