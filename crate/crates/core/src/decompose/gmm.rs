//! Two-component 1-D Gaussian mixtures fitted by EM, one per channel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const VARIANCE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GmmConfig {
    pub max_iter: usize,
    /// Stop once an iteration raises the log-likelihood by less than this.
    pub tol: f64,
    pub min_samples: usize,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-9,
            min_samples: 50,
        }
    }
}

/// Mixture fit for one channel. Component 0 starts as the signal guess, but
/// the signal is whichever component ends with the smaller variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelFit {
    pub phi: f64,
    pub means: [f64; 2],
    pub variances: [f64; 2],
    pub weights: [f64; 2],
    pub signal: usize,
    /// Samples whose signal responsibility exceeds one half.
    pub signal_count: usize,
    pub iterations: usize,
    /// Log-likelihood after each E-step.
    pub log_likelihood: Vec<f64>,
    /// All samples were identical; `phi` is that value and no EM ran.
    pub zero_variance: bool,
}

/// Per-channel sun-to-sky ratio with the fits that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SunSkyRatio {
    pub phi: Vec<f64>,
    pub channels: Vec<ChannelFit>,
    pub sample_count: usize,
}

impl SunSkyRatio {
    /// A fixed ratio without diagnostics (e.g. from ground truth).
    pub fn fixed(phi: Vec<f64>) -> Self {
        Self {
            phi,
            channels: Vec::new(),
            sample_count: 0,
        }
    }
}

fn log_density(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * PI * var).ln() - (x - mean) * (x - mean) / (2.0 * var)
}

/// Fits a two-component mixture to one channel's samples.
///
/// Initialization: signal at the median with 0.25× the sample variance,
/// noise at the mean with 4× the sample variance, equal weights. Samples are
/// sorted first so the fit does not depend on their order.
pub fn fit_two_component(samples: &[f64], cfg: &GmmConfig) -> Result<ChannelFit> {
    if samples.len() < cfg.min_samples.max(2) {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            need: cfg.min_samples.max(2),
        });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite φ sample"));
    }
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;

    if x[0] == x[x.len() - 1] {
        return Ok(ChannelFit {
            phi: x[0],
            means: [x[0], x[0]],
            variances: [0.0, 0.0],
            weights: [1.0, 0.0],
            signal: 0,
            signal_count: x.len(),
            iterations: 0,
            log_likelihood: Vec::new(),
            zero_variance: true,
        });
    }

    let mid = x.len() / 2;
    let median = if x.len() % 2 == 1 { x[mid] } else { 0.5 * (x[mid - 1] + x[mid]) };
    let mean = x.iter().sum::<f64>() / n;
    let var = (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).max(VARIANCE_FLOOR);

    let mut means = [median, mean];
    let mut vars = [(0.25 * var).max(VARIANCE_FLOOR), 4.0 * var];
    let mut weights = [0.5f64, 0.5];
    let mut resp = vec![0.0f64; x.len()];
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0;

    for _ in 0..cfg.max_iter {
        // E-step; resp holds the component-0 responsibility
        let mut ll = 0.0;
        for (xi, r) in x.iter().zip(resp.iter_mut()) {
            let a = weights[0].ln() + log_density(*xi, means[0], vars[0]);
            let b = weights[1].ln() + log_density(*xi, means[1], vars[1]);
            let m = a.max(b);
            let lse = m + ((a - m).exp() + (b - m).exp()).ln();
            *r = (a - lse).exp();
            ll += lse;
        }
        if let Some(&prev) = trace.last() {
            debug_assert!(
                ll >= prev - 1e-9 * prev.abs().max(1.0),
                "EM log-likelihood decreased: {prev} -> {ll}"
            );
            trace.push(ll);
            if ll - prev < cfg.tol {
                break;
            }
        } else {
            trace.push(ll);
        }
        iterations += 1;

        // M-step
        let n0: f64 = resp.iter().sum();
        let n1 = n - n0;
        if n0 <= f64::MIN_POSITIVE || n1 <= f64::MIN_POSITIVE {
            break;
        }
        let m0 = x.iter().zip(&resp).map(|(v, r)| r * v).sum::<f64>() / n0;
        let m1 = x.iter().zip(&resp).map(|(v, r)| (1.0 - r) * v).sum::<f64>() / n1;
        let v0 = x.iter().zip(&resp).map(|(v, r)| r * (v - m0) * (v - m0)).sum::<f64>() / n0;
        let v1 = x.iter().zip(&resp).map(|(v, r)| (1.0 - r) * (v - m1) * (v - m1)).sum::<f64>() / n1;
        means = [m0, m1];
        vars = [v0.max(VARIANCE_FLOOR), v1.max(VARIANCE_FLOOR)];
        weights = [n0 / n, n1 / n];
    }

    let signal = if vars[0] < vars[1] || (vars[0] == vars[1] && weights[0] >= weights[1]) {
        0
    } else {
        1
    };
    let signal_count = resp
        .iter()
        .filter(|&&r| if signal == 0 { r > 0.5 } else { r < 0.5 })
        .count();
    Ok(ChannelFit {
        phi: means[signal],
        means,
        variances: vars,
        weights,
        signal,
        signal_count,
        iterations,
        log_likelihood: trace,
        zero_variance: false,
    })
}

/// Fits each channel of the per-pair φ samples independently.
pub fn fit_phi_gmm(samples: &[Vec<f64>], cfg: &GmmConfig) -> Result<SunSkyRatio> {
    let channels = samples.first().map(|s| s.len()).ok_or(Error::TooFewSamples {
        got: 0,
        need: cfg.min_samples.max(2),
    })?;
    if samples.iter().any(|s| s.len() != channels) {
        return Err(Error::invalid("φ samples have inconsistent channel counts"));
    }
    let fits = (0..channels)
        .map(|c| {
            let column: Vec<f64> = samples.iter().map(|s| s[c]).collect();
            fit_two_component(&column, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let phi: Vec<f64> = fits.iter().map(|f| f.phi).collect();
    if phi.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::Degenerate(format!("fitted φ {phi:?} is not positive")));
    }
    Ok(SunSkyRatio {
        phi,
        channels: fits,
        sample_count: samples.len(),
    })
}
