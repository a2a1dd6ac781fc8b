//! Row-level feature engineering: geodesic distance, calendar fields, age.

use chrono::{DateTime, Datelike, NaiveDate, Timelike};

use crate::error::{Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

fn check_coord(lat: f64, lon: f64) -> Result<()> {
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(Error::InvalidArgument(format!(
            "coordinate ({lat}, {lon}) outside lat [-90, 90] / lon [-180, 180]"
        )));
    }
    Ok(())
}

/// Great-circle distance in kilometres between two points given in degrees.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> Result<f64> {
    check_coord(lat1, lon1)?;
    check_coord(lat2, lon2)?;
    let (phi1, phi2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    let a = a.clamp(0.0, 1.0);
    Ok(2.0 * EARTH_RADIUS_KM * a.sqrt().atan2((1.0 - a).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeFeatures {
    pub hour: u32,
    pub day: u32,
    /// 0 = Monday.
    pub weekday: u32,
    pub month: u32,
    pub year: i32,
}

/// UTC calendar decomposition of a Unix timestamp.
pub fn extract_time_features(unix_time: i64) -> Result<TimeFeatures> {
    let t = DateTime::from_timestamp(unix_time, 0)
        .ok_or_else(|| Error::InvalidArgument(format!("timestamp {unix_time} out of range")))?;
    Ok(TimeFeatures {
        hour: t.hour(),
        day: t.day(),
        weekday: t.weekday().num_days_from_monday(),
        month: t.month(),
        year: t.year(),
    })
}

/// Completed years between `dob` and `at`. A 29 February birthday counts as
/// reached on 1 March in common years.
pub fn compute_age_years(dob: NaiveDate, at: NaiveDate) -> Result<u32> {
    if dob > at {
        return Err(Error::InvalidArgument(format!("date of birth {dob} is after {at}")));
    }
    let mut years = at.year() - dob.year();
    if (at.month(), at.day()) < (dob.month(), dob.day()) {
        years -= 1;
    }
    Ok(years as u32)
}
