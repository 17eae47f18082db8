//! `sunsky metrics`: PSNR and SSIM of predictions against ground truth.

use std::path::PathBuf;

use sunsky::metrics::{evaluate, MetricReport, MetricSpace};

use super::{file_stem, list_exr, read_exr};
use crate::{config_error, Outcome};

#[derive(Debug, Clone, clap::Args)]
pub struct MetricsArgs {
    /// Directory of predicted EXRs.
    #[arg(long)]
    pub prediction: PathBuf,
    /// Directory of ground-truth EXRs with matching file names.
    #[arg(long)]
    pub truth: PathBuf,
    /// Output CSV.
    #[arg(long)]
    pub output: PathBuf,
    /// Compare raw linear samples instead of display-encoded 8-bit values.
    #[arg(long)]
    pub linear: bool,
    /// Peak value for linear comparisons.
    #[arg(long, default_value_t = 1.0)]
    pub peak: f64,
}

fn number(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.6}")
    }
}

pub fn run_metrics(args: &MetricsArgs) -> anyhow::Result<Outcome> {
    let space = if args.linear {
        if !(args.peak > 0.0) {
            return Err(config_error("peak must be positive"));
        }
        MetricSpace::Linear { peak: args.peak }
    } else {
        MetricSpace::Display
    };
    let predictions = list_exr(&args.prediction)?;
    let mut rows: Vec<(String, MetricReport)> = Vec::new();
    let mut outcome = Outcome::default();
    for path in &predictions {
        let truth = args.truth.join(path.file_name().expect("listed file"));
        if !truth.exists() {
            log::warn!("no ground truth for {}", path.display());
            continue;
        }
        match (|| anyhow::Ok(evaluate(&read_exr(path)?, &read_exr(&truth)?, space)?))() {
            Ok(r) => {
                outcome.succeeded += 1;
                rows.push((file_stem(path), r));
            }
            Err(e) => {
                outcome.failed += 1;
                log::error!("{}: {e:#}", path.display());
            }
        }
    }
    if rows.is_empty() && outcome.failed == 0 {
        return Err(config_error("no prediction has a matching ground-truth file"));
    }
    let mut w = csv::Writer::from_path(&args.output)?;
    w.write_record(["image", "psnr", "ssim", "pixels"])?;
    for (name, r) in &rows {
        w.write_record([name.clone(), number(r.psnr), number(r.ssim), r.pixel_count.to_string()])?;
    }
    if !rows.is_empty() {
        let n = rows.len() as f64;
        let psnr = rows.iter().map(|(_, r)| r.psnr).sum::<f64>() / n;
        let ssim = rows.iter().map(|(_, r)| r.ssim).sum::<f64>() / n;
        let pixels: usize = rows.iter().map(|(_, r)| r.pixel_count).sum();
        w.write_record(["mean".to_string(), number(psnr), number(ssim), pixels.to_string()])?;
        println!("mean PSNR {} dB, mean SSIM {} over {} images", number(psnr), number(ssim), rows.len());
    }
    w.flush()?;
    Ok(outcome)
}
