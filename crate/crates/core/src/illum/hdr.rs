use crate::{Error, LinearImage, Result};

/// Default hat-weight limits as fractions of full scale.
pub const DEFAULT_FLOOR: f64 = 0.02;
pub const DEFAULT_SATURATION: f64 = 0.98;

/// Bracketed single-channel frames in sensor-linear counts scaled to [0, 1].
#[derive(Debug, Clone)]
pub struct ExposureStack {
    frames: Vec<LinearImage>,
    exposure_times: Vec<f64>,
}

impl ExposureStack {
    pub fn new(frames: Vec<LinearImage>, exposure_times: Vec<f64>) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::TooFewSamples { got: frames.len(), need: 2 });
        }
        if frames.len() != exposure_times.len() {
            return Err(Error::invalid("one exposure time per frame required"));
        }
        if exposure_times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::invalid("exposure times must be positive"));
        }
        if exposure_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("exposure times must be strictly increasing"));
        }
        let first = &frames[0];
        if frames.iter().any(|f| f.channels() != 1 || !f.same_size(first)) {
            return Err(Error::DimensionMismatch("frames must be single-channel and equally sized".into()));
        }
        Ok(Self { frames, exposure_times })
    }

    pub fn frames(&self) -> &[LinearImage] {
        &self.frames
    }

    pub fn exposure_times(&self) -> &[f64] {
        &self.exposure_times
    }
}

/// Weighted radiance merge of linear frames.
///
/// Per pixel, `E = Σ w(z)·z/t / Σ w(z)` over frames with `floor < z < saturation`,
/// `w(z) = min(z − floor, saturation − z)`. When no frame qualifies the pixel
/// takes `z/t` from the longest unsaturated frame if one exists (everything
/// is dark), otherwise from the shortest frame (everything is clipped).
pub fn merge_hdr(stack: &ExposureStack, saturation: f64, floor: f64) -> Result<LinearImage> {
    if !(0.0 <= floor && floor < saturation && saturation <= 1.0) {
        return Err(Error::invalid(format!("need 0 <= floor < saturation <= 1, got {floor}, {saturation}")));
    }
    let first = &stack.frames[0];
    let times = &stack.exposure_times;
    LinearImage::from_rows(first.width(), first.height(), 1, |y, line| {
        for (x, out) in line.iter_mut().enumerate() {
            let (mut num, mut den) = (0.0f64, 0.0f64);
            for (frame, &t) in stack.frames.iter().zip(times) {
                let z = frame.get(x, y, 0) as f64;
                if z > floor && z < saturation {
                    let w = (z - floor).min(saturation - z);
                    num += w * z / t;
                    den += w;
                }
            }
            *out = if den > 0.0 {
                (num / den) as f32
            } else {
                let longest_unsaturated = (0..times.len())
                    .rev()
                    .find(|&i| (stack.frames[i].get(x, y, 0) as f64) < saturation);
                let i = longest_unsaturated.unwrap_or(0);
                (stack.frames[i].get(x, y, 0) as f64 / times[i]) as f32
            };
        }
    })
}
