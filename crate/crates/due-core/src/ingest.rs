//! Raw dataset ingestion: per-channel (timestamp, watts) text files are
//! mean-resampled to the 900 s grid, summed into categories via a channel
//! map, and the aggregate is built as the exact sum of the categories.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::household::{parse_household, HouseholdProfile};
use crate::series::{SampledSeries, DAY_SECONDS, STEP_METER};
use crate::types::Category;

/// How a channel contributes: to a category, or not at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelEntry {
    pub channel: String,
    pub appliance: String,
    /// None = ignore the channel.
    pub target: Option<Category>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChannelMap {
    pub entries: Vec<ChannelEntry>,
}

/// Parse a channel map (tab-separated: channel, appliance, category or
/// `ignore`). A channel may appear only once.
pub fn parse_channel_map(text: &str) -> Result<ChannelMap> {
    let mut entries: Vec<ChannelEntry> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::Parse {
                line: i + 1,
                reason: "expected channel<TAB>appliance<TAB>category".into(),
            });
        }
        let channel = cols[0].trim().to_string();
        if entries.iter().any(|e| e.channel == channel) {
            return Err(Error::Parse {
                line: i + 1,
                reason: format!("channel '{channel}' mapped twice"),
            });
        }
        let target = match cols[2].trim() {
            "ignore" => None,
            label => Some(label.parse()?),
        };
        entries.push(ChannelEntry {
            channel,
            appliance: cols[1].trim().to_string(),
            target,
        });
    }
    Ok(ChannelMap { entries })
}

/// Longest run of empty 900 s slots that is forward-filled; anything longer
/// is zero-filled and the affected days are flagged degraded.
pub const MAX_FFILL_SLOTS: usize = 2;

#[derive(Debug, Clone)]
pub struct Ingested {
    pub categories: BTreeMap<Category, SampledSeries>,
    pub aggregate: SampledSeries,
    /// Days touched by long gaps; excluded from metrics by default.
    pub degraded_days: BTreeSet<NaiveDate>,
    /// Channels that parsed but carried no rows.
    pub empty_channels: Vec<String>,
}

fn parse_channel_rows(text: &str, name: &str) -> Result<Vec<(i64, f64)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(ts), Some(w)) = (it.next(), it.next()) else {
            return Err(Error::Parse {
                line: i + 1,
                reason: format!("channel '{name}': expected timestamp and watts"),
            });
        };
        let ts: i64 = ts.parse().map_err(|_| Error::Parse {
            line: i + 1,
            reason: format!("channel '{name}': bad timestamp '{ts}'"),
        })?;
        let w: f64 = w.parse().map_err(|_| Error::Parse {
            line: i + 1,
            reason: format!("channel '{name}': bad power '{w}'"),
        })?;
        rows.push((ts, w));
    }
    rows.sort_by_key(|r| r.0);
    Ok(rows)
}

/// Mean per 900 s slot over [span_start, span_end), with the gap policy
/// applied. Returns the values and the slots that belong to long gaps.
fn grid_channel(
    rows: &[(i64, f64)],
    span_start: i64,
    slots: usize,
) -> (Vec<f64>, Vec<usize>) {
    let mut sums = vec![0.0; slots];
    let mut counts = vec![0usize; slots];
    for &(ts, w) in rows {
        let slot = (ts - span_start) / STEP_METER as i64;
        if (0..slots as i64).contains(&slot) {
            sums[slot as usize] += w;
            counts[slot as usize] += 1;
        }
    }
    let mut values = vec![0.0; slots];
    let mut degraded = Vec::new();
    let mut i = 0;
    while i < slots {
        if counts[i] > 0 {
            values[i] = sums[i] / counts[i] as f64;
            i += 1;
            continue;
        }
        let run_start = i;
        while i < slots && counts[i] == 0 {
            i += 1;
        }
        let run = i - run_start;
        if run <= MAX_FFILL_SLOTS && run_start > 0 {
            for s in run_start..i {
                values[s] = values[run_start - 1];
            }
        } else {
            degraded.extend(run_start..i);
        }
    }
    (values, degraded)
}

/// Load every mapped channel from `dir` (file `<channel>.tsv`, rows of
/// epoch-seconds and watts), resample, fill gaps, and build category plus
/// aggregate series over the covered whole-day span.
pub fn load_channels(dir: &Path, map: &ChannelMap) -> Result<Ingested> {
    let mut parsed: Vec<(usize, Vec<(i64, f64)>)> = Vec::new();
    let mut empty_channels = Vec::new();
    for (idx, entry) in map.entries.iter().enumerate() {
        if entry.target.is_none() {
            continue;
        }
        let path = dir.join(format!("{}.tsv", entry.channel));
        let text = std::fs::read_to_string(&path)?;
        let rows = parse_channel_rows(&text, &entry.channel)?;
        if rows.is_empty() {
            empty_channels.push(entry.channel.clone());
        }
        parsed.push((idx, rows));
    }
    let lo = parsed
        .iter()
        .filter_map(|(_, r)| r.first().map(|x| x.0))
        .min()
        .ok_or_else(|| Error::InsufficientData("no channel carries data".into()))?;
    let hi = parsed
        .iter()
        .filter_map(|(_, r)| r.last().map(|x| x.0))
        .max()
        .unwrap();
    let day = DAY_SECONDS as i64;
    let span_start = lo.div_euclid(day) * day;
    let span_end = (hi + 1).div_euclid(day) * day + if (hi + 1) % day != 0 { day } else { 0 };
    let slots = ((span_end - span_start) / STEP_METER as i64) as usize;
    let start = chrono::DateTime::from_timestamp(span_start, 0)
        .expect("valid epoch")
        .naive_utc();

    let mut categories: BTreeMap<Category, Vec<f64>> = BTreeMap::new();
    let mut degraded_slots: BTreeSet<usize> = BTreeSet::new();
    for (idx, rows) in &parsed {
        let cat = map.entries[*idx].target.unwrap();
        let (values, degraded) = grid_channel(rows, span_start, slots);
        degraded_slots.extend(degraded);
        let dst = categories.entry(cat).or_insert_with(|| vec![0.0; slots]);
        for (a, b) in dst.iter_mut().zip(values.iter()) {
            *a += b;
        }
    }
    let mut aggregate = vec![0.0; slots];
    for v in categories.values() {
        for (a, b) in aggregate.iter_mut().zip(v.iter()) {
            *a += b;
        }
    }
    let degraded_days = degraded_slots
        .into_iter()
        .map(|s| {
            chrono::DateTime::from_timestamp(span_start + (s as i64) * STEP_METER as i64, 0)
                .unwrap()
                .date_naive()
        })
        .collect();
    Ok(Ingested {
        categories: categories
            .into_iter()
            .map(|(c, values)| (c, SampledSeries { start, step: STEP_METER, values }))
            .collect(),
        aggregate: SampledSeries {
            start,
            step: STEP_METER,
            values: aggregate,
        },
        degraded_days,
        empty_channels,
    })
}

pub fn load_household(path: &Path) -> Result<HouseholdProfile> {
    parse_household(&std::fs::read_to_string(path)?)
}

/// Contiguous, non-overlapping train/test windows from the front of the
/// series.
pub fn split_train_test(
    series: &SampledSeries,
    train_days: usize,
    test_days: usize,
) -> Result<(SampledSeries, SampledSeries)> {
    let total = series.full_days()?;
    if train_days + test_days > total {
        return Err(Error::InsufficientData(format!(
            "need {} days, have {total}",
            train_days + test_days
        )));
    }
    let per_day = (DAY_SECONDS / series.step) as usize;
    let train = SampledSeries {
        start: series.start,
        step: series.step,
        values: series.values[..train_days * per_day].to_vec(),
    };
    let test_lo = train_days * per_day;
    let test = SampledSeries {
        start: series.start + chrono::Duration::days(train_days as i64),
        step: series.step,
        values: series.values[test_lo..test_lo + test_days * per_day].to_vec(),
    };
    Ok((train, test))
}
