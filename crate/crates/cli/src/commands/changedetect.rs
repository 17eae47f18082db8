//! `sunsky changedetect`: albedo differencing against a reference frame.

use std::path::PathBuf;

use sunsky::changedet::{change_mask, ChangeConfig};

use super::{create_dir, file_stem, list_exr, read_exr, write_png, write_text};
use crate::{config_error, Outcome};

pub const SUMMARY_FILE: &str = "changes.csv";

#[derive(Debug, Clone, clap::Args)]
pub struct ChangedetectArgs {
    /// Reference albedo EXR, or a directory whose files pair with the
    /// sources by name.
    #[arg(long)]
    pub reference: PathBuf,
    /// Directory of source albedo EXRs.
    #[arg(long)]
    pub sources: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// 8-bit gray-level difference threshold.
    #[arg(long, default_value_t = ChangeConfig::default().threshold)]
    pub threshold: u8,
    #[arg(long, default_value_t = ChangeConfig::default().min_blob_area)]
    pub min_blob_area: usize,
    #[arg(long, default_value_t = ChangeConfig::default().opening_radius)]
    pub opening_radius: usize,
}

pub fn run_changedetect(args: &ChangedetectArgs) -> anyhow::Result<Outcome> {
    let cfg = ChangeConfig {
        threshold: args.threshold,
        min_blob_area: args.min_blob_area,
        opening_radius: args.opening_radius,
    };
    cfg.validate().map_err(|e| config_error(e.to_string()))?;
    let sources = list_exr(&args.sources)?;
    if sources.is_empty() {
        return Err(config_error(format!("no EXR files in {}", args.sources.display())));
    }
    let single = if args.reference.is_dir() {
        None
    } else {
        Some(read_exr(&args.reference).map_err(|e| config_error(format!("{e:#}")))?)
    };
    create_dir(&args.output)?;

    let mut summary = csv::Writer::from_writer(Vec::new());
    summary.write_record(["frame", "changed_pixels", "blob_count"])?;
    let mut outcome = Outcome::default();
    for path in &sources {
        let frame = file_stem(path);
        let result = (|| {
            let reference = match &single {
                Some(r) => r.clone(),
                None => read_exr(&args.reference.join(path.file_name().expect("listed file")))?,
            };
            let mask = change_mask(&reference, &read_exr(path)?, &cfg)?;
            write_png(&mask, &args.output, &format!("{frame}_change.png"))?;
            anyhow::Ok(mask)
        })();
        match result {
            Ok(mask) => {
                outcome.succeeded += 1;
                summary.write_record([frame, mask.count().to_string(), mask.blob_count().to_string()])?;
            }
            Err(e) => {
                outcome.failed += 1;
                log::error!("{frame}: {e:#}");
            }
        }
    }
    write_text(&args.output, SUMMARY_FILE, &String::from_utf8(summary.into_inner()?)?)?;
    Ok(outcome)
}
