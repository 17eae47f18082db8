//! Image containers and the linear-radiance substrate shared by every stage.
//!
//! Sample layout is interleaved and row-major: sample `(x, y, c)` lives at
//! `(y * width + x) * channels + c`. [`LinearImage::sample_index`] is the only
//! place that formula is spelled out.

mod display;
mod exr_io;
mod mask;

pub use display::{srgb_decode, srgb_encode, to_display_gray8, to_display_srgb8, Gray8};
pub use exr_io::{read_linear_exr, write_linear_exr};
pub use mask::{read_mask_png, write_gray8_png, write_mask_png, BinaryMask};
pub(crate) use mask::neighbours4;

use crate::{Error, Result};

/// Floating-point raster in linear radiance space with 1 or 3 channels.
///
/// Samples are finite and non-negative; the global scale is arbitrary.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl LinearImage {
    /// Validates and wraps interleaved samples.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::ChannelCount(channels));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a {width}x{height}x{channels} image",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let pixel = pos / channels;
            return Err(Error::NonFiniteSample {
                pixel,
                x: pixel % width,
                y: pixel / width,
                channel: pos % channels,
            });
        }
        if let Some(pos) = data.iter().position(|v| *v < 0.0) {
            return Err(Error::invalid(format!(
                "negative sample {} at index {pos}",
                data[pos]
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds an image from a per-sample function `f(x, y, channel)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        f: impl Fn(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    /// Builds an image from scanlines computed in parallel. `row(y, line)`
    /// fills `width * channels` interleaved samples.
    pub fn from_rows(
        width: usize,
        height: usize,
        channels: usize,
        row: impl Fn(usize, &mut [f32]) + Sync + Send,
    ) -> Result<Self> {
        let data = crate::par::fill_rows(width * channels, height, 0.0f32, row);
        Self::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn sample_index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[self.sample_index(x, y, c)]
    }

    /// All channels of pixel `(x, y)`.
    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let i = self.sample_index(x, y, 0);
        &self.data[i..i + self.channels]
    }

    /// Channel `c` of the pixel with linear index `p = y * width + x`.
    #[inline]
    pub fn at(&self, p: usize, c: usize) -> f32 {
        self.data[p * self.channels + c]
    }

    pub fn same_shape(&self, other: &LinearImage) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub fn same_size(&self, other: &LinearImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Applies `f` to every sample. The result must stay finite and non-negative.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.channels,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Extracts channel `c` as a 1-channel image.
    pub fn channel(&self, c: usize) -> Result<Self> {
        if c >= self.channels {
            return Err(Error::invalid(format!("channel {c} out of range")));
        }
        Self::new(
            self.width,
            self.height,
            1,
            self.data.iter().skip(c).step_by(self.channels).copied().collect(),
        )
    }
}

/// Rec. 709 luminance plane; single-channel images pass through.
pub fn luminance(img: &LinearImage) -> Result<LinearImage> {
    match img.channels() {
        1 => Ok(img.clone()),
        _ => LinearImage::from_fn(img.width(), img.height(), 1, |x, y, _| {
            let p = img.pixel(x, y);
            0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2]
        }),
    }
}

/// Area-average downsampling by an integer factor.
///
/// Each output pixel is the mean of its `factor x factor` source block; blocks
/// on the right and bottom edges average only the pixels that exist.
pub fn downsample_box(img: &LinearImage, factor: usize) -> Result<LinearImage> {
    if factor == 0 {
        return Err(Error::invalid("downsample factor must be >= 1"));
    }
    if factor == 1 {
        return Ok(img.clone());
    }
    let ch = img.channels;
    let out_w = img.width.div_ceil(factor);
    let out_h = img.height.div_ceil(factor);
    LinearImage::from_rows(out_w, out_h, ch, |oy, line| {
        let y0 = oy * factor;
        let y1 = (y0 + factor).min(img.height);
        for ox in 0..out_w {
            let x0 = ox * factor;
            let x1 = (x0 + factor).min(img.width);
            let n = ((y1 - y0) * (x1 - x0)) as f64;
            for c in 0..ch {
                let mut sum = 0.0f64;
                for y in y0..y1 {
                    for x in x0..x1 {
                        sum += img.get(x, y, c) as f64;
                    }
                }
                line[ox * ch + c] = (sum / n) as f32;
            }
        }
    })
}

/// Bilinear resampling with pixel-center alignment and edge clamping.
pub fn resize_bilinear(img: &LinearImage, width: usize, height: usize) -> Result<LinearImage> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("target size must be non-zero"));
    }
    if width == img.width && height == img.height {
        return Ok(img.clone());
    }
    let ch = img.channels;
    let sx = img.width as f64 / width as f64;
    let sy = img.height as f64 / height as f64;
    LinearImage::from_rows(width, height, ch, |y, line| {
        let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (img.height - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(img.height - 1);
        let ty = fy - y0 as f64;
        for x in 0..width {
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (img.width - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(img.width - 1);
            let tx = fx - x0 as f64;
            for c in 0..ch {
                let top = img.get(x0, y0, c) as f64 * (1.0 - tx) + img.get(x1, y0, c) as f64 * tx;
                let bot = img.get(x0, y1, c) as f64 * (1.0 - tx) + img.get(x1, y1, c) as f64 * tx;
                line[x * ch + c] = (top * (1.0 - ty) + bot * ty) as f32;
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_channel_count() {
        assert!(matches!(
            LinearImage::new(1, 1, 2, vec![0.0; 2]),
            Err(Error::ChannelCount(2))
        ));
    }

    #[test]
    fn reports_first_non_finite_pixel() {
        let mut data = vec![0.5f32; 4 * 3 * 3];
        data[(2 * 4 + 1) * 3 + 2] = f32::NAN;
        data[(2 * 4 + 3) * 3] = f32::INFINITY;
        match LinearImage::new(4, 3, 3, data) {
            Err(Error::NonFiniteSample { pixel, x, y, channel }) => {
                assert_eq!((pixel, x, y, channel), (9, 1, 2, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn downsample_identity_and_constant() {
        let img = LinearImage::from_fn(5, 3, 3, |x, y, c| (x + 2 * y + c) as f32).unwrap();
        assert_eq!(downsample_box(&img, 1).unwrap(), img);
        let flat = LinearImage::filled(4, 4, 1, 0.25).unwrap();
        let small = downsample_box(&flat, 4).unwrap();
        assert_eq!((small.width(), small.height()), (1, 1));
        assert_eq!(small.get(0, 0, 0), 0.25);
        assert!(downsample_box(&flat, 0).is_err());
    }

    #[test]
    fn downsample_working_resolution() {
        let img = LinearImage::filled(5464, 3640, 1, 1.0).unwrap();
        let small = downsample_box(&img, 8).unwrap();
        assert_eq!((small.width(), small.height()), (683, 455));
    }

    #[test]
    fn downsample_partial_edge_blocks() {
        // 3x1 with factor 2: blocks {0,1} and {2}.
        let img = LinearImage::new(3, 1, 1, vec![1.0, 3.0, 10.0]).unwrap();
        let out = downsample_box(&img, 2).unwrap();
        assert_eq!(out.data(), &[2.0, 10.0]);
    }

    #[test]
    fn bilinear_preserves_constant() {
        let img = LinearImage::filled(7, 5, 3, 0.3).unwrap();
        let big = resize_bilinear(&img, 20, 11).unwrap();
        assert!(big.data().iter().all(|v| (v - 0.3).abs() < 1e-6));
    }

    proptest! {
        #[test]
        fn downsample_constant_is_idempotent(v in 0.0f32..100.0, w in 1usize..20, h in 1usize..20, f in 1usize..9) {
            let img = LinearImage::filled(w, h, 3, v).unwrap();
            let out = downsample_box(&img, f).unwrap();
            prop_assert!(out.data().iter().all(|s| (s - v).abs() <= v * 1e-6));
        }
    }
}
