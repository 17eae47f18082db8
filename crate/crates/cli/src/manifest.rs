//! Image manifest: a header line, then one whitespace-separated record per
//! image:
//!
//! ```text
//! id image fx fy cx cy r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz width height utc lat lon [flight]
//! ```
//!
//! Image paths are relative to the manifest. Blank lines and lines starting
//! with `#` are ignored.

use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use sunsky::geometry::{parse_camera_fields, CameraModel, CAMERA_FIELD_COUNT};

use crate::config_error;

pub const HEADER: &str = "id image fx fy cx cy r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz width height utc lat lon flight";

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub id: String,
    pub image: PathBuf,
    pub camera: CameraModel,
    pub utc: DateTime<Utc>,
    pub latitude: f64,
    pub longitude: f64,
    pub flight: Option<String>,
}

const MIN_FIELDS: usize = 2 + CAMERA_FIELD_COUNT + 3;

pub fn parse_manifest(text: &str, base: &Path) -> anyhow::Result<Vec<ImageRecord>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, header)) if header.split_whitespace().next() == Some("id") => {}
        _ => return Err(config_error("manifest must start with a header line beginning with `id`")),
    }
    let mut records: Vec<ImageRecord> = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != MIN_FIELDS && fields.len() != MIN_FIELDS + 1 {
            return Err(config_error(format!(
                "manifest line {line_no}: expected {MIN_FIELDS} or {} fields, found {}",
                MIN_FIELDS + 1,
                fields.len()
            )));
        }
        let bad = |what: &str, e: &dyn std::fmt::Display| config_error(format!("manifest line {line_no}: {what}: {e}"));
        let camera = parse_camera_fields(&fields[2..2 + CAMERA_FIELD_COUNT]).map_err(|e| bad("camera", &e))?;
        let rest = &fields[2 + CAMERA_FIELD_COUNT..];
        let utc = DateTime::parse_from_rfc3339(rest[0])
            .map_err(|e| bad("utc", &e))?
            .with_timezone(&Utc);
        let latitude: f64 = rest[1].parse().map_err(|e| bad("lat", &e))?;
        let longitude: f64 = rest[2].parse().map_err(|e| bad("lon", &e))?;
        let id = fields[0].to_string();
        if records.iter().any(|r| r.id == id) {
            return Err(config_error(format!("manifest line {line_no}: duplicate id {id}")));
        }
        records.push(ImageRecord {
            id,
            image: base.join(fields[1]),
            camera,
            utc,
            latitude,
            longitude,
            flight: rest.get(3).map(|s| s.to_string()),
        });
    }
    if records.is_empty() {
        return Err(config_error("manifest lists no images"));
    }
    Ok(records)
}

pub fn read_manifest(path: &Path) -> anyhow::Result<Vec<ImageRecord>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read manifest {}: {e}", path.display())))?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new("")))
}

/// One manifest line; `image` is written as given.
pub fn format_record(id: &str, image: &str, camera: &CameraModel, utc: &DateTime<Utc>, lat: f64, lon: f64, flight: Option<&str>) -> String {
    let mut fields = vec![id.to_string(), image.to_string()];
    fields.extend(camera.to_fields());
    fields.push(utc.to_rfc3339_opts(SecondsFormat::Secs, true));
    fields.push(format!("{lat:?}"));
    fields.push(format!("{lon:?}"));
    fields.extend(flight.map(str::to_string));
    fields.join(" ")
}
