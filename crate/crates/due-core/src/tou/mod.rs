//! Time-of-use diary ingestion and the activity model estimated from it:
//! initial activity distributions, per-slot transition rows and duration
//! statistics, all stratified by (employment, age group, day type).
//!
//! Probabilities are stored as raw counts and divided on query, so the
//! estimators agree exactly with a counting oracle.

mod synthetic;

pub use synthetic::{generate_synthetic_diary, StratumRequest, SyntheticConfig};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Read;

use crate::error::{Error, Result};
use crate::series::ACTIVITY_SLOTS_PER_DAY;
use crate::types::{day_type_of, ActivityState, AgeGroup, DayType, Employment, ACTIVITY_COUNT};

pub const SLOTS: usize = ACTIVITY_SLOTS_PER_DAY; // 288 five-minute slots

pub type Stratum = (Employment, AgeGroup, DayType);

/// One contiguous diary episode. Slots are 5-minute indices; consecutive
/// events of a person-day tile [0, 288).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityEvent {
    pub person: String,
    pub employment: Employment,
    pub age_group: AgeGroup,
    pub date: NaiveDate,
    pub day_type: DayType,
    pub activity: ActivityState,
    pub start_slot: u16,
    pub end_slot: u16,
}

impl ActivityEvent {
    pub fn stratum(&self) -> Stratum {
        (self.employment, self.age_group, self.day_type)
    }

    pub fn duration_min(&self) -> f64 {
        (self.end_slot - self.start_slot) as f64 * 5.0
    }
}

/// A state change between two tiling events of one person-day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionEvent {
    pub employment: Employment,
    pub age_group: AgeGroup,
    pub day_type: DayType,
    pub from: ActivityState,
    pub to: ActivityState,
    /// Slot at which the change happens: end of the from-event, start of the
    /// to-event. Never 0 (midnight belongs to the initial distribution).
    pub slot: u16,
}

/// Parse a diary file: delimited text (tab), header row, columns
/// person / employment / age_group / date / activity / start / end with
/// HH:MM times and 24:00 accepted as end-of-day.
pub fn parse_diary<R: Read>(reader: R) -> Result<Vec<ActivityEvent>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_reader(reader);
    let mut events = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        if row.len() != 7 {
            return Err(Error::Parse {
                line,
                reason: format!("expected 7 columns, got {}", row.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&row[3], "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            reason: format!("bad date '{}': {e}", &row[3]),
        })?;
        let start_slot = parse_slot(&row[5], line)?;
        let end_slot = parse_slot(&row[6], line)?;
        events.push(ActivityEvent {
            person: row[0].to_string(),
            employment: row[1].parse()?,
            age_group: row[2].parse()?,
            date,
            day_type: day_type_of(date),
            activity: row[4].parse()?,
            start_slot,
            end_slot,
        });
    }
    check_tiling(&events)?;
    Ok(events)
}

fn parse_slot(text: &str, line: usize) -> Result<u16> {
    let (h, m) = text.split_once(':').ok_or(Error::Parse {
        line,
        reason: format!("bad time '{text}'"),
    })?;
    let h: u16 = h.parse().map_err(|_| Error::Parse {
        line,
        reason: format!("bad hour in '{text}'"),
    })?;
    let m: u16 = m.parse().map_err(|_| Error::Parse {
        line,
        reason: format!("bad minute in '{text}'"),
    })?;
    if h > 24 || m > 59 || (h == 24 && m != 0) || m % 5 != 0 {
        return Err(Error::Parse {
            line,
            reason: format!("time '{text}' not on the 5-min grid within 00:00-24:00"),
        });
    }
    Ok(h * 12 + m / 5)
}

/// Group events by (person, date), preserving first-seen order.
fn person_days(events: &[ActivityEvent]) -> Vec<((String, NaiveDate), Vec<&ActivityEvent>)> {
    let mut order: Vec<(String, NaiveDate)> = Vec::new();
    let mut map: BTreeMap<(String, NaiveDate), Vec<&ActivityEvent>> = BTreeMap::new();
    for e in events {
        let key = (e.person.clone(), e.date);
        if !map.contains_key(&key) {
            order.push(key.clone());
        }
        map.entry(key).or_default().push(e);
    }
    order
        .into_iter()
        .map(|k| {
            let v = map.remove(&k).unwrap();
            (k, v)
        })
        .collect()
}

fn check_tiling(events: &[ActivityEvent]) -> Result<()> {
    for ((person, date), mut day) in person_days(events) {
        day.sort_by_key(|e| e.start_slot);
        let mut cursor = 0u16;
        for e in &day {
            if e.start_slot >= e.end_slot {
                return Err(Error::Diary {
                    person: person.clone(),
                    day: date.to_string(),
                    reason: format!("empty or inverted episode at slot {}", e.start_slot),
                });
            }
            if e.start_slot != cursor {
                let kind = if e.start_slot > cursor { "gap" } else { "overlap" };
                return Err(Error::Diary {
                    person: person.clone(),
                    day: date.to_string(),
                    reason: format!("{kind} at slot {cursor}"),
                });
            }
            cursor = e.end_slot;
        }
        if cursor as usize != SLOTS {
            return Err(Error::Diary {
                person,
                day: date.to_string(),
                reason: format!("day ends at slot {cursor}, expected {SLOTS}"),
            });
        }
    }
    Ok(())
}

/// Derive the transition event table from tiling activity events.
pub fn transition_events(events: &[ActivityEvent]) -> Vec<TransitionEvent> {
    let mut out = Vec::new();
    for (_, mut day) in person_days(events) {
        day.sort_by_key(|e| e.start_slot);
        for pair in day.windows(2) {
            out.push(TransitionEvent {
                employment: pair[0].employment,
                age_group: pair[0].age_group,
                day_type: pair[0].day_type,
                from: pair[0].activity,
                to: pair[1].activity,
                slot: pair[0].end_slot,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct DurationStat {
    pub count: u32,
    pub sum_min: f64,
    pub sum_sq_min: f64,
}

impl DurationStat {
    pub fn push(&mut self, minutes: f64) {
        self.count += 1;
        self.sum_min += minutes;
        self.sum_sq_min += minutes * minutes;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum_min / self.count as f64)
    }

    /// Population standard deviation.
    pub fn std(&self) -> Option<f64> {
        let mean = self.mean()?;
        let var = (self.sum_sq_min / self.count as f64 - mean * mean).max(0.0);
        Some(var.sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TransRow {
    pub counts: [u32; ACTIVITY_COUNT],
    pub total: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct StratumStats {
    pub pi_counts: [u32; ACTIVITY_COUNT],
    pub pi_total: u32,
    /// (slot, from-activity index) -> observed departures.
    pub trans: BTreeMap<(u16, u8), TransRow>,
    pub durations: [DurationStat; ACTIVITY_COUNT],
}

/// Which level of the fallback chain answered a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    Direct,
    PooledDayTypes,
    /// Initial distribution only: no observations anywhere.
    Uniform,
    /// Transition rows only: no observed departure, the state persists.
    Continuation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ActivityModel {
    strata: BTreeMap<Stratum, StratumStats>,
}

impl ActivityModel {
    /// Estimate initial distributions, transition rows and duration
    /// statistics from an activity event table.
    pub fn estimate(events: &[ActivityEvent]) -> ActivityModel {
        let mut model = ActivityModel::default();
        for e in events {
            let s = model.strata.entry(e.stratum()).or_default();
            if e.start_slot == 0 {
                s.pi_counts[e.activity.index()] += 1;
                s.pi_total += 1;
            }
            s.durations[e.activity.index()].push(e.duration_min());
        }
        for t in transition_events(events) {
            let s = model
                .strata
                .entry((t.employment, t.age_group, t.day_type))
                .or_default();
            let row = s
                .trans
                .entry((t.slot, t.from.index() as u8))
                .or_default();
            row.counts[t.to.index()] += 1;
            row.total += 1;
        }
        model
    }

    pub fn stats(&self, stratum: &Stratum) -> Option<&StratumStats> {
        self.strata.get(stratum)
    }

    pub fn strata(&self) -> impl Iterator<Item = (&Stratum, &StratumStats)> {
        self.strata.iter()
    }

    /// Initial activity distribution at midnight, with the fallback chain
    /// direct -> pooled over day types -> uniform.
    pub fn initial_distribution(
        &self,
        employment: Employment,
        age_group: AgeGroup,
        day_type: DayType,
    ) -> ([f64; ACTIVITY_COUNT], Fallback) {
        if let Some(s) = self.strata.get(&(employment, age_group, day_type)) {
            if s.pi_total > 0 {
                return (normalize_counts(&s.pi_counts, s.pi_total), Fallback::Direct);
            }
        }
        let mut pooled = [0u32; ACTIVITY_COUNT];
        let mut total = 0u32;
        for d in DayType::ALL {
            if let Some(s) = self.strata.get(&(employment, age_group, d)) {
                for (p, c) in pooled.iter_mut().zip(s.pi_counts.iter()) {
                    *p += c;
                }
                total += s.pi_total;
            }
        }
        if total > 0 {
            return (normalize_counts(&pooled, total), Fallback::PooledDayTypes);
        }
        (
            [1.0 / ACTIVITY_COUNT as f64; ACTIVITY_COUNT],
            Fallback::Uniform,
        )
    }

    /// Transition row out of `from` at `slot`, same fallback chain.
    pub fn transition_row(
        &self,
        employment: Employment,
        age_group: AgeGroup,
        day_type: DayType,
        from: ActivityState,
        slot: u16,
    ) -> ([f64; ACTIVITY_COUNT], Fallback) {
        let key = (slot, from.index() as u8);
        if let Some(row) = self
            .strata
            .get(&(employment, age_group, day_type))
            .and_then(|s| s.trans.get(&key))
        {
            if row.total > 0 {
                return (normalize_counts(&row.counts, row.total), Fallback::Direct);
            }
        }
        let mut pooled = [0u32; ACTIVITY_COUNT];
        let mut total = 0u32;
        for d in DayType::ALL {
            if let Some(row) = self
                .strata
                .get(&(employment, age_group, d))
                .and_then(|s| s.trans.get(&key))
            {
                for (p, c) in pooled.iter_mut().zip(row.counts.iter()) {
                    *p += c;
                }
                total += row.total;
            }
        }
        if total > 0 {
            return (normalize_counts(&pooled, total), Fallback::PooledDayTypes);
        }
        // No departure was ever observed out of this state at this slot, so
        // the only supported inference is that the activity continues.
        let mut stay = [0.0; ACTIVITY_COUNT];
        stay[from.index()] = 1.0;
        (stay, Fallback::Continuation)
    }

    /// Duration mean/std in minutes for an activity, falling back from the
    /// exact stratum to pooled day types, then to all strata, then to a
    /// fixed (60, 30) default.
    pub fn duration_stats(
        &self,
        employment: Employment,
        age_group: AgeGroup,
        day_type: DayType,
        activity: ActivityState,
    ) -> (f64, f64) {
        let idx = activity.index();
        if let Some(s) = self.strata.get(&(employment, age_group, day_type)) {
            let d = &s.durations[idx];
            if d.count > 0 {
                return (d.mean().unwrap(), d.std().unwrap());
            }
        }
        let mut pooled = DurationStat::default();
        for d in DayType::ALL {
            if let Some(s) = self.strata.get(&(employment, age_group, d)) {
                let st = &s.durations[idx];
                pooled.count += st.count;
                pooled.sum_min += st.sum_min;
                pooled.sum_sq_min += st.sum_sq_min;
            }
        }
        if pooled.count > 0 {
            return (pooled.mean().unwrap(), pooled.std().unwrap());
        }
        let mut global = DurationStat::default();
        for s in self.strata.values() {
            let st = &s.durations[idx];
            global.count += st.count;
            global.sum_min += st.sum_min;
            global.sum_sq_min += st.sum_sq_min;
        }
        if global.count > 0 {
            return (global.mean().unwrap(), global.std().unwrap());
        }
        (60.0, 30.0)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            strata: self
                .strata
                .iter()
                .map(|((e, g, d), stats)| StratumEntry {
                    employment: *e,
                    age_group: *g,
                    day_type: *d,
                    pi_counts: stats.pi_counts,
                    pi_total: stats.pi_total,
                    transitions: stats
                        .trans
                        .iter()
                        .map(|(&(slot, from), row)| TransEntry {
                            slot,
                            from,
                            counts: row.counts,
                            total: row.total,
                        })
                        .collect(),
                    durations: stats.durations,
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<ActivityModel> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Config(format!(
                "unknown activity model format '{}'",
                file.format
            )));
        }
        let mut model = ActivityModel::default();
        for entry in file.strata {
            let mut stats = StratumStats {
                pi_counts: entry.pi_counts,
                pi_total: entry.pi_total,
                durations: entry.durations,
                ..Default::default()
            };
            for t in entry.transitions {
                stats.trans.insert(
                    (t.slot, t.from),
                    TransRow {
                        counts: t.counts,
                        total: t.total,
                    },
                );
            }
            model
                .strata
                .insert((entry.employment, entry.age_group, entry.day_type), stats);
        }
        Ok(model)
    }
}

fn normalize_counts(counts: &[u32; ACTIVITY_COUNT], total: u32) -> [f64; ACTIVITY_COUNT] {
    let mut out = [0.0; ACTIVITY_COUNT];
    for (o, c) in out.iter_mut().zip(counts.iter()) {
        *o = *c as f64 / total as f64;
    }
    out
}

const MODEL_FORMAT: &str = "due-activity-model-v1";

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    strata: Vec<StratumEntry>,
}

#[derive(Serialize, Deserialize)]
struct StratumEntry {
    employment: Employment,
    age_group: AgeGroup,
    day_type: DayType,
    pi_counts: [u32; ACTIVITY_COUNT],
    pi_total: u32,
    transitions: Vec<TransEntry>,
    durations: [DurationStat; ACTIVITY_COUNT],
}

#[derive(Serialize, Deserialize)]
struct TransEntry {
    slot: u16,
    from: u8,
    counts: [u32; ACTIVITY_COUNT],
    total: u32,
}
