//! Random activity chain generation: inverse-CDF integer sampling over the
//! estimated distributions, truncated-normal durations and splittable
//! deterministic random streams.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::tou::{ActivityModel, SLOTS};
use crate::types::{ActivityState, AgeGroup, DayType, Employment, PersonProfile};

/// Deterministic random stream. Streams fork per (household, person, day)
/// tag so per-day results do not depend on processing order.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
    state: u64,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        let state = splitmix(seed);
        RandomSource {
            rng: ChaCha8Rng::seed_from_u64(state),
            state,
        }
    }

    /// Derive an independent stream for the given tags.
    pub fn fork(&self, tags: &[u64]) -> RandomSource {
        let mut state = self.state;
        for &t in tags {
            state = splitmix(state ^ t.wrapping_mul(0xD605_0F38_29FB_964B));
        }
        RandomSource {
            rng: ChaCha8Rng::seed_from_u64(state),
            state,
        }
    }

    /// Uniform draw in the open interval (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.gen();
            if u > 0.0 && u < 1.0 {
                return u;
            }
        }
    }

    pub fn uniform_range(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..hi)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            return false;
        }
        if p >= 1.0 {
            return true;
        }
        self.uniform_open() <= p
    }

    pub fn normal(&mut self, mean: f64, std: f64) -> f64 {
        if std <= 0.0 {
            return mean;
        }
        Normal::new(mean, std).unwrap().sample(&mut self.rng)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.rng.gen_range(0..=i);
            items.swap(i, j);
        }
    }
}

/// Inverse-CDF sampling on an unnormalized weight vector: the smallest index
/// n with eps <= F(n)/sum(F), ties at cumulative boundaries resolving to the
/// earlier index.
pub fn sample_discrete(weights: &[f64], eps: f64) -> Result<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidSeries("all-zero weight vector".into()));
    }
    let mut cumulative = 0.0;
    for (i, w) in weights.iter().enumerate() {
        cumulative += w;
        if eps <= cumulative / total {
            return Ok(i);
        }
    }
    Ok(weights.len() - 1) // eps ~ 1.0 with floating residue
}

/// One person's planned day on the 5-minute grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityChain {
    pub person: usize,
    pub date: chrono::NaiveDate,
    /// (activity, start slot, end slot), tiling [0, 288).
    pub entries: Vec<(ActivityState, u16, u16)>,
}

impl ActivityChain {
    pub fn tiles(&self) -> bool {
        let mut cursor = 0u16;
        for &(_, s, e) in &self.entries {
            if s != cursor || e <= s {
                return false;
            }
            cursor = e;
        }
        cursor as usize == SLOTS
    }

    pub fn activity_at(&self, slot: u16) -> Option<ActivityState> {
        self.entries
            .iter()
            .find(|&&(_, s, e)| slot >= s && slot < e)
            .map(|&(a, _, _)| a)
    }

    /// Episodes of the given activities.
    pub fn episodes<'a>(
        &'a self,
        activities: &'a [ActivityState],
    ) -> impl Iterator<Item = (ActivityState, u16, u16)> + 'a {
        self.entries
            .iter()
            .filter(move |(a, _, _)| activities.contains(a))
            .copied()
    }
}

/// Draw an activity duration in minutes: normal(mean, std) truncated below
/// at 5 min and rounded to the 5-min grid.
pub fn sample_duration(
    model: &ActivityModel,
    stratum: (Employment, AgeGroup, DayType),
    activity: ActivityState,
    rng: &mut RandomSource,
) -> u32 {
    let (mean, std) = model.duration_stats(stratum.0, stratum.1, stratum.2, activity);
    let draw = rng.normal(mean, std);
    let rounded = ((draw / 5.0).round() * 5.0).max(5.0);
    rounded as u32
}

/// Next activity from the initial distribution (`current = None`) or from
/// the transition row at the given slot.
pub fn next_activity(
    model: &ActivityModel,
    stratum: (Employment, AgeGroup, DayType),
    current: Option<(ActivityState, u16)>,
    rng: &mut RandomSource,
) -> ActivityState {
    let (dist, _) = match current {
        None => model.initial_distribution(stratum.0, stratum.1, stratum.2),
        Some((activity, slot)) => {
            model.transition_row(stratum.0, stratum.1, stratum.2, activity, slot)
        }
    };
    let eps = rng.uniform_open();
    let idx = sample_discrete(&dist, eps).expect("fallback-resolved distribution is never all-zero");
    ActivityState::from_index(idx)
}

/// Generate a full-day chain for one person. An optional compatibility
/// filter may reject a sampled (activity, window); after 5 rejections the
/// candidate is accepted unconditionally.
pub fn generate_chain_filtered(
    model: &ActivityModel,
    person: usize,
    profile: &PersonProfile,
    date: chrono::NaiveDate,
    rng: &mut RandomSource,
    mut filter: Option<&mut dyn FnMut(ActivityState, u16, u16) -> bool>,
) -> ActivityChain {
    let stratum = (
        profile.employment,
        profile.age_group,
        crate::types::day_type_of(date),
    );
    let mut entries = Vec::new();
    let mut cursor: u16 = 0;
    let mut current: Option<ActivityState> = None;
    while (cursor as usize) < SLOTS {
        let (activity, end) = {
            let mut attempt = 0;
            loop {
                let candidate = next_activity(
                    model,
                    stratum,
                    current.map(|a| (a, cursor)),
                    rng,
                );
                let duration_slots = (sample_duration(model, stratum, candidate, rng) / 5) as u16;
                let end = (cursor + duration_slots).min(SLOTS as u16);
                let accepted = match filter.as_deref_mut() {
                    Some(f) => f(candidate, cursor, end) || attempt >= 5,
                    None => true,
                };
                if accepted {
                    break (candidate, end);
                }
                attempt += 1;
            }
        };
        entries.push((activity, cursor, end));
        cursor = end;
        current = Some(activity);
    }
    ActivityChain {
        person,
        date,
        entries,
    }
}

pub fn generate_chain(
    model: &ActivityModel,
    person: usize,
    profile: &PersonProfile,
    date: chrono::NaiveDate,
    rng: &mut RandomSource,
) -> ActivityChain {
    generate_chain_filtered(model, person, profile, date, rng, None)
}
