//! Uniformly sampled real-power series, the signal carrier for every module.
//!
//! Three grids are used throughout: 60 s for appliance pulse simulation,
//! 300 s for activity discretization and 900 s for measurements. A "daily"
//! series covers exactly one calendar day.

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const STEP_SIM: u32 = 60;
pub const STEP_ACTIVITY: u32 = 300;
pub const STEP_METER: u32 = 900;
pub const DAY_SECONDS: u32 = 86_400;

/// Slots per day on the 900 s measurement grid.
pub const METER_SLOTS_PER_DAY: usize = (DAY_SECONDS / STEP_METER) as usize;
/// Slots per day on the 300 s activity grid.
pub const ACTIVITY_SLOTS_PER_DAY: usize = (DAY_SECONDS / STEP_ACTIVITY) as usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSeries {
    pub start: NaiveDateTime,
    /// Sampling step in seconds.
    pub step: u32,
    /// Mean real power per step, in watts.
    pub values: Vec<f64>,
}

impl SampledSeries {
    pub fn new(start: NaiveDateTime, step: u32, values: Vec<f64>) -> Result<Self> {
        if !matches!(step, STEP_SIM | STEP_ACTIVITY | STEP_METER) {
            return Err(Error::InvalidSeries(format!("unsupported step {step} s")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries("non-finite value".into()));
        }
        Ok(SampledSeries {
            start,
            step,
            values,
        })
    }

    pub fn zeros(start: NaiveDateTime, step: u32, len: usize) -> Self {
        SampledSeries {
            start,
            step,
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total energy in watt-hours.
    pub fn energy_wh(&self) -> f64 {
        let h = self.step as f64 / 3600.0;
        self.values.iter().sum::<f64>() * h
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when the series covers exactly one calendar day starting at midnight.
    pub fn is_daily(&self) -> bool {
        self.start.time().num_seconds_from_midnight() == 0
            && self.len() as u32 * self.step == DAY_SECONDS
    }

    /// Covered span in whole days, erroring unless the series starts at
    /// midnight and is an exact number of days long.
    pub fn full_days(&self) -> Result<usize> {
        if self.start.time().num_seconds_from_midnight() != 0 {
            return Err(Error::InvalidSeries("series does not start at midnight".into()));
        }
        let total = self.len() as u32 * self.step;
        if total == 0 || total % DAY_SECONDS != 0 {
            return Err(Error::InvalidSeries(format!(
                "length {} s is not a whole number of days",
                total
            )));
        }
        Ok((total / DAY_SECONDS) as usize)
    }

    /// Slice out the n-th covered day (0-based) as a daily series.
    pub fn day(&self, n: usize) -> Result<SampledSeries> {
        let per_day = (DAY_SECONDS / self.step) as usize;
        let lo = n * per_day;
        let hi = lo + per_day;
        if hi > self.len() {
            return Err(Error::InvalidSeries(format!("day {n} out of range")));
        }
        Ok(SampledSeries {
            start: self.start + chrono::Duration::seconds((lo as u32 * self.step) as i64),
            step: self.step,
            values: self.values[lo..hi].to_vec(),
        })
    }

    pub fn date(&self) -> NaiveDate {
        self.start.date()
    }
}

/// Mean-resample to a coarser grid. The target step must be an integer
/// multiple of the source step; total energy is preserved.
pub fn resample(series: &SampledSeries, target_step: u32) -> Result<SampledSeries> {
    if target_step == series.step {
        return Ok(series.clone());
    }
    if target_step < series.step || target_step % series.step != 0 {
        return Err(Error::StepMismatch {
            from_step: series.step,
            to_step: target_step,
        });
    }
    let ratio = (target_step / series.step) as usize;
    if series.len() % ratio != 0 {
        return Err(Error::InvalidSeries(format!(
            "length {} not divisible by ratio {}",
            series.len(),
            ratio
        )));
    }
    let values = series
        .values
        .chunks_exact(ratio)
        .map(|c| c.iter().sum::<f64>() / ratio as f64)
        .collect();
    Ok(SampledSeries {
        start: series.start,
        step: target_step,
        values,
    })
}

pub fn midnight(date: NaiveDate) -> NaiveDateTime {
    date.and_hms_opt(0, 0, 0).unwrap()
}
