pub mod changedetect;
pub mod decompose;
pub mod metrics;
pub mod skymerge;
pub mod synth;

use std::path::Path;

use anyhow::Context;
use sunsky::imagecore::{read_linear_exr, write_linear_exr, write_mask_png};
use sunsky::{BinaryMask, LinearImage};

pub(crate) fn write_exr(img: &LinearImage, dir: &Path, name: &str) -> anyhow::Result<()> {
    write_linear_exr(img, dir.join(name)).with_context(|| format!("writing {name}"))
}

pub(crate) fn write_png(mask: &BinaryMask, dir: &Path, name: &str) -> anyhow::Result<()> {
    write_mask_png(mask, dir.join(name)).with_context(|| format!("writing {name}"))
}

pub(crate) fn write_text(dir: &Path, name: &str, text: &str) -> anyhow::Result<()> {
    std::fs::write(dir.join(name), text).with_context(|| format!("writing {name}"))
}

pub(crate) fn read_exr(path: &Path) -> anyhow::Result<LinearImage> {
    read_linear_exr(path).with_context(|| format!("reading {}", path.display()))
}

pub(crate) fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| crate::config_error(format!("cannot create output directory {}: {e}", dir.display())))
}

/// `*.exr` files in a directory, sorted by name.
pub(crate) fn list_exr(dir: &Path) -> anyhow::Result<Vec<std::path::PathBuf>> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| crate::config_error(format!("cannot list {}: {e}", dir.display())))?;
    let mut files: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("exr")))
        .collect();
    files.sort();
    Ok(files)
}

pub(crate) fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
