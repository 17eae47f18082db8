//! Display-referred conversions. Previews and the 8-bit change-detection
//! scale only; nothing here feeds back into radiometric computation.

use super::LinearImage;

/// Linear to sRGB-encoded value, input clamped to [0, 1].
pub fn srgb_encode(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    if x <= 0.003_130_8 {
        12.92 * x
    } else {
        1.055 * x.powf(1.0 / 2.4) - 0.055
    }
}

/// sRGB-encoded value in [0, 1] to linear.
pub fn srgb_decode(v: f64) -> f64 {
    let v = v.clamp(0.0, 1.0);
    if v <= 0.040_45 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray8 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl Gray8 {
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

const LUMA: [f64; 3] = [0.2126, 0.7152, 0.0722];

fn quantize(v: f64) -> u8 {
    // round half up
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// sRGB transfer per channel, Rec. 709 luma on the encoded values, 8-bit.
pub fn to_display_gray8(img: &LinearImage) -> Gray8 {
    let data = crate::par::map_indices(img.pixel_count(), |p| {
        if img.channels() == 1 {
            quantize(srgb_encode(img.at(p, 0) as f64))
        } else {
            let luma: f64 = (0..3)
                .map(|c| LUMA[c] * srgb_encode(img.at(p, c) as f64))
                .sum();
            quantize(luma)
        }
    });
    Gray8 {
        width: img.width(),
        height: img.height(),
        data,
    }
}

/// Per-channel sRGB code values in [0, 255] (unrounded), kept as floats so
/// the metrics can run on them.
pub fn to_display_srgb8(img: &LinearImage) -> LinearImage {
    img.map(|v| (srgb_encode(v as f64) * 255.0) as f32)
        .expect("sRGB codes are finite and non-negative")
}
