//! Sunrise and sunset approximation used to gate lighting.
//!
//! Solar declination is approximated by a cosine of the day-of-year and
//! the day length follows from the sunset hour angle. Solar noon is taken
//! at 12:00 local time; for the mid-latitude sites this serves, the
//! resulting error is well under the 15-min measurement slot.

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// Sunrise and sunset as minutes from local midnight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunTimes {
    pub sunrise_min: f64,
    pub sunset_min: f64,
}

impl SunTimes {
    /// True when minute-of-day `m` falls between sunset and sunrise.
    pub fn is_dark(&self, minute: f64) -> bool {
        minute < self.sunrise_min || minute >= self.sunset_min
    }

    pub fn day_length_min(&self) -> f64 {
        self.sunset_min - self.sunrise_min
    }
}

/// Solar declination in radians for a given date.
fn declination(date: NaiveDate) -> f64 {
    let n = date.ordinal() as f64;
    -(23.44f64.to_radians()) * (std::f64::consts::TAU * (n + 10.0) / 365.0).cos()
}

/// Compute sunrise and sunset for a date and latitude (degrees, north
/// positive). Latitudes where the sun never rises or never sets on that
/// date are rejected.
pub fn sun_times(date: NaiveDate, latitude_deg: f64) -> Result<SunTimes> {
    if !(-90.0..=90.0).contains(&latitude_deg) {
        return Err(Error::PolarLatitude(latitude_deg));
    }
    let phi = latitude_deg.to_radians();
    let delta = declination(date);
    let cos_omega = -(phi.tan() * delta.tan());
    if !(-1.0..=1.0).contains(&cos_omega) {
        return Err(Error::PolarLatitude(latitude_deg));
    }
    let omega_deg = cos_omega.acos().to_degrees();
    // 15 degrees of hour angle per hour, noon at 12:00
    let half_day_min = omega_deg * 4.0;
    Ok(SunTimes {
        sunrise_min: 720.0 - half_day_min,
        sunset_min: 720.0 + half_day_min,
    })
}
