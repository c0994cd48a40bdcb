//! Per-day pre-treatment of the aggregate load: standby extraction, fridge
//! pattern learning / synchronization / subtraction, and peak-based
//! occupancy detection.

use crate::appliance::ApplianceSpec;
use crate::error::{Error, Result};
use crate::series::{resample, SampledSeries, METER_SLOTS_PER_DAY, STEP_METER, STEP_SIM};

/// Night window used for fridge learning: 02:30 - 05:00.
pub const NIGHT_START_MIN: u32 = 150;
pub const NIGHT_END_MIN: u32 = 300;
const NIGHT_SLOT_LO: usize = (NIGHT_START_MIN * 60 / STEP_METER) as usize; // 10
const NIGHT_SLOT_HI: usize = (NIGHT_END_MIN * 60 / STEP_METER) as usize; // 20

/// Bounded search grid for the fridge cycle length, minutes.
pub const CYCLE_MIN_BOUND: u32 = 30;
pub const CYCLE_MAX_BOUND: u32 = 180;

const HISTOGRAM_BIN_W: f64 = 5.0;

/// Standby is the daily minimum; the residual has minimum exactly zero.
pub fn extract_standby(day: &SampledSeries) -> (f64, SampledSeries) {
    let standby = day.min();
    let residual = SampledSeries {
        start: day.start,
        step: day.step,
        values: day.values.iter().map(|v| v - standby).collect(),
    };
    (standby, residual)
}

/// Learned fridge pattern. Durations in minutes; the phase offset is the
/// position within the cycle at midnight.
#[derive(Debug, Clone, PartialEq)]
pub struct FridgeEstimate {
    pub nominal_power: f64,
    pub cycle_min: u32,
    /// Active cooling duration during the day (duty beta1).
    pub active_day_min: u32,
    /// Active cooling duration at night (duty beta2).
    pub active_night_min: u32,
    pub phase_min: u32,
    /// Reference day pattern on the 900 s grid at the learned phase.
    pub template_day: SampledSeries,
}

fn active_minutes(beta: f64, cycle: u32) -> u32 {
    let raw = ((beta * cycle as f64 / 5.0).round() * 5.0) as u32;
    raw.clamp(5, cycle)
}

/// Duty-cycled square wave over one day on the 60 s grid: beta1 duty during
/// the day, beta2 duty inside the night window.
pub fn fridge_wave_day(
    nominal_power: f64,
    cycle_min: u32,
    active_day_min: u32,
    active_night_min: u32,
    phase_min: u32,
    start: chrono::NaiveDateTime,
) -> SampledSeries {
    let mut values = vec![0.0; 1440];
    for (m, v) in values.iter_mut().enumerate() {
        let m = m as u32;
        let active = if (NIGHT_START_MIN..NIGHT_END_MIN).contains(&m) {
            active_night_min
        } else {
            active_day_min
        };
        let pos = (m as i64 - phase_min as i64).rem_euclid(cycle_min as i64) as u32;
        if pos < active {
            *v = nominal_power;
        }
    }
    SampledSeries {
        start,
        step: STEP_SIM,
        values,
    }
}

fn night_wave(nominal: f64, cycle: u32, active: u32, phase_at_night_start: u32) -> Vec<f64> {
    // simulated night window at 60 s, resampled to 900 s (10 slots)
    let minutes = (NIGHT_END_MIN - NIGHT_START_MIN) as usize;
    let mut sim = vec![0.0; minutes];
    for (m, v) in sim.iter_mut().enumerate() {
        let pos = (m as i64 - phase_at_night_start as i64).rem_euclid(cycle as i64) as u32;
        if pos < active {
            *v = nominal;
        }
    }
    sim.chunks_exact(15)
        .map(|c| c.iter().sum::<f64>() / 15.0)
        .collect()
}

/// Learn the fridge pattern from a multi-day standby-filtered history at
/// 900 s. Nights (02:30-05:00, all nights in the window) are clustered by
/// their mean power with a 5 W histogram; the dominant cluster fixes the
/// fridge night mean, the nominal power update follows, and cycle length
/// plus phase are fitted by least squares on the 5-min grid.
pub fn learn_fridge(history: &SampledSeries, spec: &ApplianceSpec) -> Result<FridgeEstimate> {
    if history.step != STEP_METER {
        return Err(Error::Fridge("history must be on the 900 s grid".into()));
    }
    let beta1 = spec.beta1.unwrap_or(0.0);
    let beta2 = spec.beta2.unwrap_or(0.0);
    if beta2 <= 0.0 {
        return Err(Error::Fridge(format!(
            "appliance '{}' has no night duty cycle",
            spec.name
        )));
    }
    let days = history.full_days()?;
    let mut nights: Vec<&[f64]> = Vec::new();
    for d in 0..days {
        let lo = d * METER_SLOTS_PER_DAY + NIGHT_SLOT_LO;
        let hi = d * METER_SLOTS_PER_DAY + NIGHT_SLOT_HI;
        if hi <= history.len() {
            nights.push(&history.values[lo..hi]);
        }
    }
    if nights.is_empty() {
        return Err(Error::Fridge("history spans no complete night".into()));
    }

    // Cluster nights by mean power; keep nights near the dominant bin so a
    // night polluted by some other load does not skew the estimate.
    let night_means: Vec<f64> = nights
        .iter()
        .map(|n| n.iter().sum::<f64>() / n.len() as f64)
        .collect();
    let max_bin = night_means
        .iter()
        .map(|m| (m / HISTOGRAM_BIN_W).floor() as i64)
        .fold(std::collections::BTreeMap::<i64, u32>::new(), |mut acc, b| {
            *acc.entry(b).or_default() += 1;
            acc
        })
        .into_iter()
        .max_by_key(|&(bin, count)| (count, -bin))
        .map(|(bin, _)| bin)
        .unwrap();
    let selected: Vec<usize> = (0..nights.len())
        .filter(|&i| {
            let bin = (night_means[i] / HISTOGRAM_BIN_W).floor() as i64;
            (bin - max_bin).abs() <= 1
        })
        .collect();
    let sample_count: usize = selected.iter().map(|&i| nights[i].len()).sum();
    let fridge_mean = selected
        .iter()
        .flat_map(|&i| nights[i].iter())
        .sum::<f64>()
        / sample_count as f64;
    if fridge_mean <= 0.5 {
        return Err(Error::Fridge("night consumption is flat, no fridge pattern".into()));
    }

    // P_new = P_old * fridge_mean / (P_old * beta2)
    let nominal = spec.nominal_power * fridge_mean / (spec.nominal_power * beta2);

    // Fit cycle length and phase: shared cycle, per-night phase.
    let mut best: Option<(f64, u32, u32)> = None; // (sse, cycle, phase of first night)
    let mut cycle = CYCLE_MIN_BOUND;
    while cycle <= CYCLE_MAX_BOUND {
        let active = active_minutes(beta2, cycle);
        let mut total_sse = 0.0;
        let mut first_phase = 0u32;
        for (k, &i) in selected.iter().enumerate() {
            let measured = nights[i];
            let mut night_best = f64::INFINITY;
            let mut night_phase = 0u32;
            let mut phase = 0u32;
            while phase < cycle {
                let sim = night_wave(nominal, cycle, active, phase);
                let sse: f64 = sim
                    .iter()
                    .zip(measured.iter())
                    .map(|(s, m)| (s - m) * (s - m))
                    .sum();
                if sse < night_best {
                    night_best = sse;
                    night_phase = phase;
                }
                phase += 5;
            }
            total_sse += night_best;
            if k == 0 {
                first_phase = night_phase;
            }
        }
        match best {
            Some((sse, _, _)) if sse <= total_sse => {}
            _ => best = Some((total_sse, cycle, first_phase)),
        }
        cycle += 5;
    }
    let (_, cycle_min, night_phase) = best.unwrap();

    // Convert the first fitted night phase to a midnight phase offset.
    let phase_min =
        ((night_phase as i64 + NIGHT_START_MIN as i64).rem_euclid(cycle_min as i64)) as u32;
    let active_day_min = if beta1 > 0.0 {
        active_minutes(beta1, cycle_min)
    } else {
        active_minutes(beta2, cycle_min)
    };
    let active_night_min = active_minutes(beta2, cycle_min);
    let template = fridge_wave_day(
        nominal,
        cycle_min,
        active_day_min,
        active_night_min,
        phase_min,
        history.start,
    );
    Ok(FridgeEstimate {
        nominal_power: nominal,
        cycle_min,
        active_day_min,
        active_night_min,
        phase_min,
        template_day: resample(&template, STEP_METER)?,
    })
}

/// Synchronize the learned fridge wave to one measured day (phase re-fit on
/// the 5-min grid by least squares) and subtract it. The returned fridge
/// signal is capped by the measured day so the residual is exactly
/// non-negative; the capped-away energy is reported in watt-hours.
pub fn subtract_fridge(
    day: &SampledSeries,
    est: &FridgeEstimate,
) -> (SampledSeries, SampledSeries, f64) {
    let mut best_wave: Option<(f64, Vec<f64>)> = None;
    let mut phase = 0u32;
    while phase < est.cycle_min {
        let wave = fridge_wave_day(
            est.nominal_power,
            est.cycle_min,
            est.active_day_min,
            est.active_night_min,
            phase,
            day.start,
        );
        let wave900 = resample(&wave, STEP_METER).expect("1440 min resamples to 96 slots");
        let sse: f64 = wave900
            .values
            .iter()
            .zip(day.values.iter())
            .map(|(w, m)| (w - m) * (w - m))
            .sum();
        match &best_wave {
            Some((b, _)) if *b <= sse => {}
            _ => best_wave = Some((sse, wave900.values)),
        }
        phase += 5;
    }
    let wave = best_wave.unwrap().1;
    let mut fridge = Vec::with_capacity(day.len());
    let mut residual = Vec::with_capacity(day.len());
    let mut clipped_wh = 0.0;
    for (w, m) in wave.iter().zip(day.values.iter()) {
        let f = w.min(*m);
        clipped_wh += (w - f) * STEP_METER as f64 / 3600.0;
        fridge.push(f);
        residual.push(m - f);
    }
    (
        SampledSeries {
            start: day.start,
            step: STEP_METER,
            values: fridge,
        },
        SampledSeries {
            start: day.start,
            step: STEP_METER,
            values: residual,
        },
        clipped_wh,
    )
}

/// Alternating min/max peak tracker: a local maximum is emitted once the
/// signal has dropped by more than `delta` from the running maximum.
pub fn detect_peaks(series: &SampledSeries, delta: f64) -> Vec<(usize, f64)> {
    let mut peaks = Vec::new();
    let mut mx = f64::NEG_INFINITY;
    let mut mn = f64::INFINITY;
    let mut mx_pos = 0usize;
    let mut look_for_max = true;
    for (i, &v) in series.values.iter().enumerate() {
        if v > mx {
            mx = v;
            mx_pos = i;
        }
        if v < mn {
            mn = v;
        }
        if look_for_max {
            if v < mx - delta {
                peaks.push((mx_pos, mx));
                mn = v;
                look_for_max = false;
            }
        } else if v > mn + delta {
            mx = v;
            mx_pos = i;
            look_for_max = true;
        }
    }
    peaks
}

/// A day counts as occupied when any peak survives the threshold.
pub fn occupancy(residual: &SampledSeries, threshold: f64) -> bool {
    !detect_peaks(residual, threshold).is_empty()
}
