//! Solar position from the NOAA general solar position equations.
//!
//! Geometric (unrefracted) elevation; accurate to about 0.01° between 1900
//! and 2100.

use chrono::{DateTime, Datelike, Utc};

use crate::geometry::Vec3;
use crate::{Error, Result};

/// Sun direction in the local east-north-up frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunPosition {
    /// Degrees clockwise from north.
    pub azimuth: f64,
    /// Degrees above the horizon.
    pub elevation: f64,
    /// Unit vector toward the sun.
    pub direction: Vec3,
}

impl SunPosition {
    pub fn from_angles(azimuth: f64, elevation: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&elevation) || !azimuth.is_finite() {
            return Err(Error::invalid(format!(
                "sun angles out of range: azimuth {azimuth}, elevation {elevation}"
            )));
        }
        let (az, el) = (azimuth.to_radians(), elevation.to_radians());
        Ok(Self {
            azimuth: azimuth.rem_euclid(360.0),
            elevation,
            direction: Vec3::new(az.sin() * el.cos(), az.cos() * el.cos(), el.sin()),
        })
    }
}

fn julian_day(utc: &DateTime<Utc>) -> f64 {
    let secs = utc.timestamp() as f64 + utc.timestamp_subsec_nanos() as f64 * 1e-9;
    secs / 86_400.0 + 2_440_587.5
}

/// Sun position for a site (degrees, east-positive longitude) at a UTC instant.
pub fn sun_direction(latitude: f64, longitude: f64, utc: DateTime<Utc>) -> Result<SunPosition> {
    if !(-90.0..=90.0).contains(&latitude) || !longitude.is_finite() {
        return Err(Error::invalid(format!("invalid site {latitude}, {longitude}")));
    }
    if !(1900..=2100).contains(&utc.year()) {
        return Err(Error::TimestampOutOfRange(utc.to_rfc3339()));
    }
    let jd = julian_day(&utc);
    let jc = (jd - 2_451_545.0) / 36_525.0;

    let mean_long = (280.46646 + jc * (36000.76983 + jc * 0.0003032)).rem_euclid(360.0);
    let mean_anom = 357.52911 + jc * (35999.05029 - 0.0001537 * jc);
    let ecc = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc);
    let m = mean_anom.to_radians();
    let center = m.sin() * (1.914602 - jc * (0.004817 + 0.000014 * jc))
        + (2.0 * m).sin() * (0.019993 - 0.000101 * jc)
        + (3.0 * m).sin() * 0.000289;
    let true_long = mean_long + center;
    let omega = (125.04 - 1934.136 * jc).to_radians();
    let app_long = true_long - 0.00569 - 0.00478 * omega.sin();
    let mean_obliq =
        23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0;
    let obliq = (mean_obliq + 0.00256 * omega.cos()).to_radians();
    let decl = (obliq.sin() * app_long.to_radians().sin()).asin();

    let y = (obliq / 2.0).tan().powi(2);
    let l0 = mean_long.to_radians();
    let eq_time_min = 4.0
        * (y * (2.0 * l0).sin() - 2.0 * ecc * m.sin() + 4.0 * ecc * y * m.sin() * (2.0 * l0).cos()
            - 0.5 * y * y * (4.0 * l0).sin()
            - 1.25 * ecc * ecc * (2.0 * m).sin())
        .to_degrees();

    let minutes = utc.timestamp().rem_euclid(86_400) as f64 / 60.0
        + utc.timestamp_subsec_nanos() as f64 * 1e-9 / 60.0;
    let true_solar = (minutes + eq_time_min + 4.0 * longitude).rem_euclid(1440.0);
    let hour_angle = (true_solar / 4.0 - 180.0).to_radians();

    let lat = latitude.to_radians();
    let cos_zen = (lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos()).clamp(-1.0, 1.0);
    let elevation = 90.0 - cos_zen.acos().to_degrees();
    let azimuth = (hour_angle.sin())
        .atan2(hour_angle.cos() * lat.sin() - decl.tan() * lat.cos())
        .to_degrees()
        + 180.0;
    SunPosition::from_angles(azimuth.rem_euclid(360.0), elevation)
}
