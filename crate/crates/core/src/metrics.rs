//! Full-reference image metrics: PSNR and Gaussian-window SSIM.
//!
//! LPIPS is not provided; it needs a learned network.

use serde::Serialize;

use crate::imagecore::to_display_srgb8;
use crate::{par, Error, LinearImage, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    /// dB; `+inf` for identical images.
    pub psnr: f64,
    pub ssim: f64,
    pub pixel_count: usize,
}

/// Which scale the metrics see.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricSpace {
    /// sRGB-encoded 8-bit code values, peak 255.
    Display,
    /// Raw linear samples against the given peak.
    Linear { peak: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
        }
    }
}

fn same_shape(a: &LinearImage, b: &LinearImage) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )))
    }
}

/// `10·log10(peak² / MSE)` over every sample.
pub fn psnr(a: &LinearImage, b: &LinearImage, peak: f64) -> Result<f64> {
    same_shape(a, b)?;
    let sse: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| {
            let d = *x as f64 - *y as f64;
            d * d
        })
        .sum();
    let mse = sse / a.data().len() as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    })
}

/// Rec. 709 luma plane (identity for single-channel images).
pub fn luma(img: &LinearImage) -> Vec<f64> {
    (0..img.pixel_count())
        .map(|p| {
            if img.channels() == 1 {
                img.at(p, 0) as f64
            } else {
                0.2126 * img.at(p, 0) as f64 + 0.7152 * img.at(p, 1) as f64 + 0.0722 * img.at(p, 2) as f64
            }
        })
        .collect()
}

/// Normalized 1-D Gaussian taps.
pub fn gaussian_taps(window: usize, sigma: f64) -> Vec<f64> {
    let half = (window as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..window)
        .map(|i| (-(i as f64 - half).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Separable 'valid' filtering of a `w x h` plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let k = taps.len();
    let (ow, oh) = (w - k + 1, h - k + 1);
    let horiz: Vec<f64> = par::fill_rows(ow, h, 0.0, |y, line| {
        for (x, out) in line.iter_mut().enumerate() {
            *out = taps.iter().enumerate().map(|(i, t)| t * plane[y * w + x + i]).sum();
        }
    });
    par::fill_rows(ow, oh, 0.0, |y, line| {
        for (x, out) in line.iter_mut().enumerate() {
            *out = taps.iter().enumerate().map(|(i, t)| t * horiz[(y + i) * ow + x]).sum();
        }
    })
}

/// Mean SSIM over luma with a Gaussian window, evaluated only where the
/// window fits inside the image.
pub fn ssim(a: &LinearImage, b: &LinearImage, peak: f64, params: &SsimParams) -> Result<f64> {
    same_shape(a, b)?;
    let k = params.window;
    if a.width() < k || a.height() < k {
        return Err(Error::invalid(format!(
            "SSIM needs at least {k}x{k} pixels, got {}x{}",
            a.width(),
            a.height()
        )));
    }
    let (w, h) = (a.width(), a.height());
    let (la, lb) = (luma(a), luma(b));
    let taps = gaussian_taps(k, params.sigma);
    let prod = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).collect::<Vec<_>>();
    let mu_a = filter_valid(&la, w, h, &taps);
    let mu_b = filter_valid(&lb, w, h, &taps);
    let e_aa = filter_valid(&prod(&la, &la), w, h, &taps);
    let e_bb = filter_valid(&prod(&lb, &lb), w, h, &taps);
    let e_ab = filter_valid(&prod(&la, &lb), w, h, &taps);
    let c1 = (params.k1 * peak).powi(2);
    let c2 = (params.k2 * peak).powi(2);
    let total: f64 = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum();
    Ok(total / mu_a.len() as f64)
}

/// PSNR and SSIM of `prediction` against `truth` in the chosen space.
pub fn evaluate(prediction: &LinearImage, truth: &LinearImage, space: MetricSpace) -> Result<MetricReport> {
    let (a, b, peak) = match space {
        MetricSpace::Display => (to_display_srgb8(prediction), to_display_srgb8(truth), 255.0),
        MetricSpace::Linear { peak } => (prediction.clone(), truth.clone(), peak),
    };
    Ok(MetricReport {
        psnr: psnr(&a, &b, peak)?,
        ssim: ssim(&a, &b, peak, &SsimParams::default())?,
        pixel_count: a.pixel_count(),
    })
}
