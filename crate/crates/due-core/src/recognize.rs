//! Per-person appliance recognition: walk one activity chain against the
//! unexplained residual load and emit rectangular appliance pulses per
//! category, never spending more energy than the residual offers.

use std::collections::BTreeMap;

use crate::appliance::names;
use crate::error::Result;
use crate::household::HouseholdProfile;
use crate::sampler::{ActivityChain, RandomSource};
use crate::series::{SampledSeries, STEP_METER, STEP_SIM};
use crate::suncalc::SunTimes;
use crate::types::{ActivityState, Category};

/// Half-open minute-of-day interval.
pub type MinuteWindow = (u32, u32);

const MINUTES_PER_DAY: usize = 1440;
const MINUTES_PER_SLOT: u32 = STEP_METER / 60;

fn overlap(a: MinuteWindow, b: MinuteWindow) -> u32 {
    a.1.min(b.1).saturating_sub(a.0.max(b.0))
}

/// Appliance on/off bookkeeping shared by everyone in a household-day:
/// per-instance busy intervals plus daily and weekly usage counters.
#[derive(Debug, Clone, Default)]
pub struct DeviceStateVector {
    busy: BTreeMap<String, Vec<Vec<MinuteWindow>>>,
    day_counts: BTreeMap<String, u32>,
    week_counts: BTreeMap<String, u32>,
    /// End minutes of today's washing-machine pulses (tumble-dryer anchor).
    washer_ends: Vec<u32>,
}

impl DeviceStateVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Forget intra-day state; weekly counters survive.
    pub fn start_day(&mut self) {
        self.busy.clear();
        self.day_counts.clear();
        self.washer_ends.clear();
    }

    /// Weekly quota counters start over.
    pub fn start_week(&mut self) {
        self.week_counts.clear();
    }

    /// Is any instance of the appliance on somewhere in the window?
    pub fn is_on(&self, name: &str, w: MinuteWindow) -> bool {
        self.busy
            .get(name)
            .map(|inst| {
                inst.iter()
                    .any(|iv| iv.iter().any(|&b| overlap(w, b) > 0))
            })
            .unwrap_or(false)
    }

    /// First instance (of `count`) free over the whole window.
    pub fn free_instance(&self, name: &str, count: u32, w: MinuteWindow) -> Option<usize> {
        let empty = Vec::new();
        let inst = self.busy.get(name).unwrap_or(&empty);
        (0..count as usize).find(|&i| {
            inst.get(i)
                .map(|iv| iv.iter().all(|&b| overlap(w, b) == 0))
                .unwrap_or(true)
        })
    }

    pub fn book(&mut self, name: &str, instance: usize, w: MinuteWindow) {
        let inst = self.busy.entry(name.to_string()).or_default();
        if inst.len() <= instance {
            inst.resize(instance + 1, Vec::new());
        }
        debug_assert!(inst[instance].iter().all(|&b| overlap(w, b) == 0));
        inst[instance].push(w);
    }

    pub fn record_use(&mut self, name: &str) {
        *self.day_counts.entry(name.to_string()).or_default() += 1;
        *self.week_counts.entry(name.to_string()).or_default() += 1;
    }

    pub fn day_count(&self, name: &str) -> u32 {
        self.day_counts.get(name).copied().unwrap_or(0)
    }

    pub fn week_count(&self, name: &str) -> u32 {
        self.week_counts.get(name).copied().unwrap_or(0)
    }

    pub fn note_washer_end(&mut self, minute: u32) {
        self.washer_ends.push(minute);
    }

    pub fn washer_ends(&self) -> &[u32] {
        &self.washer_ends
    }
}

/// Per-category simulated signals on the 60 s grid for one recognition pass.
#[derive(Debug, Clone)]
pub struct CategorySignals {
    pub minutes: BTreeMap<Category, Vec<f64>>,
}

impl CategorySignals {
    pub fn empty() -> Self {
        CategorySignals {
            minutes: BTreeMap::new(),
        }
    }

    fn add(&mut self, category: Category, w: MinuteWindow, power: f64) {
        let sig = self
            .minutes
            .entry(category)
            .or_insert_with(|| vec![0.0; MINUTES_PER_DAY]);
        for m in w.0..w.1.min(MINUTES_PER_DAY as u32) {
            sig[m as usize] += power;
        }
    }

    pub fn energy_wh(&self, category: Category) -> f64 {
        self.minutes
            .get(&category)
            .map(|v| v.iter().sum::<f64>() / 60.0)
            .unwrap_or(0.0)
    }

    pub fn into_series(self, start: chrono::NaiveDateTime) -> BTreeMap<Category, SampledSeries> {
        self.minutes
            .into_iter()
            .map(|(c, v)| {
                (
                    c,
                    SampledSeries {
                        start,
                        step: STEP_SIM,
                        values: v,
                    },
                )
            })
            .collect()
    }

    /// Merge another pass (e.g. a second person) into this one.
    pub fn merge(&mut self, other: &CategorySignals) {
        for (c, v) in &other.minutes {
            let sig = self
                .minutes
                .entry(*c)
                .or_insert_with(|| vec![0.0; MINUTES_PER_DAY]);
            for (a, b) in sig.iter_mut().zip(v.iter()) {
                *a += b;
            }
        }
    }
}

/// Everything one recognition pass needs; the residual and state vector are
/// shared with the caller and updated in place.
pub struct RecognitionContext<'a> {
    /// Unexplained load, 900 s grid, one day.
    pub residual: &'a mut SampledSeries,
    pub chain: &'a ActivityChain,
    /// 0-based person index; person 0 drives full-power lighting.
    pub person: usize,
    pub household: &'a HouseholdProfile,
    pub gamma: &'a mut DeviceStateVector,
    pub rng: &'a mut RandomSource,
    pub sun: SunTimes,
}

/// A pulse of power P over the window is admissible iff every overlapped
/// 900 s slot still carries at least P scaled by the pulse's coverage of
/// that slot.
fn budget_ok(residual: &SampledSeries, w: MinuteWindow, power: f64) -> bool {
    if w.1 <= w.0 {
        return false;
    }
    let s0 = (w.0 / MINUTES_PER_SLOT) as usize;
    let s1 = ((w.1 - 1) / MINUTES_PER_SLOT) as usize;
    for s in s0..=s1.min(residual.len().saturating_sub(1)) {
        let slot = (s as u32 * MINUTES_PER_SLOT, (s as u32 + 1) * MINUTES_PER_SLOT);
        let need = power * overlap(w, slot) as f64 / MINUTES_PER_SLOT as f64;
        if residual.values[s] + 1e-9 < need {
            return false;
        }
    }
    true
}

/// Charge an admitted pulse against the residual.
fn draw_down(residual: &mut SampledSeries, w: MinuteWindow, power: f64) {
    let s0 = (w.0 / MINUTES_PER_SLOT) as usize;
    let s1 = ((w.1.max(1) - 1) / MINUTES_PER_SLOT) as usize;
    for s in s0..=s1.min(residual.len().saturating_sub(1)) {
        let slot = (s as u32 * MINUTES_PER_SLOT, (s as u32 + 1) * MINUTES_PER_SLOT);
        let spent = power * overlap(w, slot) as f64 / MINUTES_PER_SLOT as f64;
        residual.values[s] = (residual.values[s] - spent).max(0.0);
    }
}

/// Duration draw around the appliance mean: normal(tau, tau/4), rounded to
/// whole minutes, truncated to [1, max]. None when no time fits.
fn draw_duration(rng: &mut RandomSource, tau: f64, max_min: u32) -> Option<u32> {
    if max_min == 0 {
        return None;
    }
    let d = rng.normal(tau, tau / 4.0).round();
    Some((d as i64).clamp(1, max_min as i64) as u32)
}

fn episode_window(s: u16, e: u16) -> MinuteWindow {
    (s as u32 * 5, e as u32 * 5)
}

/// Place a pulse of `d` minutes somewhere inside the episode where the
/// budget still holds: offsets on the 5-min grid are scanned from a random
/// one, so placement stays stochastic but match-seeking. When the full
/// duration fits nowhere the pulse shrinks in 5-min steps — the appliance
/// only needs the load to support it for a sufficient time period. None
/// when no placement fits the remaining load.
fn seek_window(
    residual: &SampledSeries,
    rng: &mut RandomSource,
    (a, b): MinuteWindow,
    d: u32,
    power: f64,
) -> Option<MinuteWindow> {
    if b <= a || d == 0 || d > b - a {
        return None;
    }
    let mut d_try = d;
    loop {
        let positions = (b - a - d_try) / 5 + 1;
        let first = rng.uniform_range(0, positions as usize) as u32;
        for k in 0..positions {
            let o = ((first + k) % positions) * 5;
            let w = (a + o, a + o + d_try);
            if budget_ok(residual, w, power) {
                return Some(w);
            }
        }
        if d_try <= 5 {
            return None;
        }
        d_try = d_try.saturating_sub(5).max(1);
    }
}

/// Meal index by episode start: 0 breakfast, 1 lunch, 2 dinner.
pub fn meal_of_slot(slot: u16) -> Option<usize> {
    match slot {
        60..=119 => Some(0),  // 05:00-10:00
        132..=173 => Some(1), // 11:00-14:30
        210..=257 => Some(2), // 17:30-21:30
        _ => None,
    }
}

/// Activation gate: budget first (eligibility), then the usage coin.
/// Returns true when the pulse was emitted.
#[allow(clippy::too_many_arguments)]
fn try_emit(
    ctx: &mut RecognitionContext,
    signals: &mut CategorySignals,
    name: &str,
    category: Category,
    power: f64,
    count: u32,
    w: MinuteWindow,
    probability: f64,
) -> bool {
    if probability <= 0.0 {
        return false;
    }
    let Some(instance) = ctx.gamma.free_instance(name, count, w) else {
        return false;
    };
    if !budget_ok(ctx.residual, w, power) {
        return false;
    }
    if !ctx.rng.bernoulli(probability) {
        return false;
    }
    signals.add(category, w, power);
    draw_down(ctx.residual, w, power);
    ctx.gamma.book(name, instance, w);
    ctx.gamma.record_use(name);
    true
}

/// Only hairdryers: one pulse per Showering episode of at least 5 min.
pub fn recognize_heating(ctx: &mut RecognitionContext) -> CategorySignals {
    let mut signals = CategorySignals::empty();
    let episodes: Vec<_> = ctx.chain.episodes(&[ActivityState::Showering]).collect();
    for (_, s, e) in episodes {
        let (a, b) = episode_window(s, e);
        if b - a < 5 {
            continue;
        }
        let Some(spec) = ctx.household.owned(names::HAIRDRYER).cloned() else {
            continue;
        };
        let tau = spec.tau_min.unwrap_or(5.0);
        let Some(d) = draw_duration(ctx.rng, tau, b - a) else {
            continue;
        };
        let Some(w) = seek_window(ctx.residual, ctx.rng, (a, b), d, spec.nominal_power) else {
            continue;
        };
        try_emit(
            ctx,
            &mut signals,
            names::HAIRDRYER,
            Category::Heating,
            spec.nominal_power,
            spec.count,
            w,
            spec.beta1.unwrap_or(0.0),
        );
    }
    signals
}

/// Lighting during darkness for active people. Person 0 gets the full
/// nominal power, each further person the beta1-scaled share. Per 900 s
/// slot the emission is capped by the remaining residual.
pub fn add_lighting(ctx: &mut RecognitionContext) -> CategorySignals {
    let mut signals = CategorySignals::empty();
    let Some(light) = ctx.household.owned(names::LIGHTING).cloned() else {
        return signals;
    };
    let scale = if ctx.person == 0 {
        1.0
    } else {
        light.beta1.unwrap_or(0.25)
    };
    let power = light.nominal_power * scale;
    let mut desired = vec![0.0; MINUTES_PER_DAY];
    for (act, s, e) in &ctx.chain.entries {
        if act.is_no_light() {
            continue;
        }
        for m in (*s as u32 * 5)..(*e as u32 * 5) {
            if ctx.sun.is_dark(m as f64) {
                desired[m as usize] = power;
            }
        }
    }
    for s in 0..ctx.residual.len() {
        let lo = s * MINUTES_PER_SLOT as usize;
        let slot = &mut desired[lo..lo + MINUTES_PER_SLOT as usize];
        let mean = slot.iter().sum::<f64>() / MINUTES_PER_SLOT as f64;
        if mean <= 0.0 {
            continue;
        }
        let grant = mean.min(ctx.residual.values[s]);
        let factor = grant / mean;
        for v in slot.iter_mut() {
            *v *= factor;
        }
        ctx.residual.values[s] -= grant;
    }
    for (m, v) in desired.iter().enumerate() {
        if *v > 0.0 {
            signals.add(Category::Light, (m as u32, m as u32 + 1), *v);
        }
    }
    signals
}

/// Cooking appliances fire around Cooking/Eating episodes; the meal window
/// of the episode start picks beta1/2/3, and zero lunches or dinners at
/// home zero out the matching coin.
pub fn recognize_cooking(ctx: &mut RecognitionContext) -> CategorySignals {
    let mut signals = CategorySignals::empty();
    let episodes: Vec<_> = ctx
        .chain
        .episodes(&[ActivityState::Cooking, ActivityState::Eating])
        .collect();
    for (_, s, e) in episodes {
        let Some(meal) = meal_of_slot(s) else {
            continue;
        };
        let (a, b) = episode_window(s, e);
        let mut owned: Vec<_> = ctx
            .household
            .inventory
            .iter()
            .filter(|x| x.category == Category::Cooking && x.count > 0)
            .cloned()
            .collect();
        ctx.rng.shuffle(&mut owned);
        for spec in owned {
            let beta = [spec.beta1, spec.beta2, spec.beta3][meal].unwrap_or(0.0);
            let habit_allows = match meal {
                1 => ctx.household.habits.lunches_at_home > 0,
                2 => ctx.household.habits.dinners_at_home > 0,
                _ => true,
            };
            if !habit_allows {
                continue;
            }
            let tau = spec.tau_min.unwrap_or(5.0);
            let Some(d) = draw_duration(ctx.rng, tau, b - a) else {
                continue;
            };
            let Some(w) = seek_window(ctx.residual, ctx.rng, (a, b), d, spec.nominal_power)
            else {
                continue;
            };
            try_emit(
                ctx,
                &mut signals,
                &spec.name,
                Category::Cooking,
                spec.nominal_power,
                spec.count,
                w,
                beta,
            );
        }
    }
    signals
}

fn weekly_quota_left(quota: Option<u32>, used: u32) -> bool {
    quota.map(|q| used < q).unwrap_or(true)
}

/// Housekeeping: vacuum on Cleaning, dishwasher on WashingDishes, washing
/// machine (and a chained tumble dryer) on Laundry. beta1 applies to the
/// first use of the day, beta2 afterwards; weekly habit quotas gate hard.
pub fn recognize_housekeeping(ctx: &mut RecognitionContext) -> CategorySignals {
    let mut signals = CategorySignals::empty();
    let episodes: Vec<_> = ctx
        .chain
        .episodes(&[
            ActivityState::Cleaning,
            ActivityState::WashingDishes,
            ActivityState::Laundry,
        ])
        .collect();
    for (act, s, e) in episodes {
        let name = match act {
            ActivityState::Cleaning => names::VACUUM,
            ActivityState::WashingDishes => names::DISHWASHER,
            ActivityState::Laundry => names::WASHING_MACHINE,
            _ => unreachable!(),
        };
        let Some(spec) = ctx.household.owned(name).cloned() else {
            continue;
        };
        let quota = match name {
            names::DISHWASHER => ctx.household.habits.dishwasher_per_week,
            names::WASHING_MACHINE => ctx.household.habits.washing_machine_per_week,
            _ => None,
        };
        if !weekly_quota_left(quota, ctx.gamma.week_count(name)) {
            continue;
        }
        let beta = if ctx.gamma.day_count(name) == 0 {
            spec.beta1
        } else {
            spec.beta2
        }
        .unwrap_or(0.0);
        let (a, b) = episode_window(s, e);
        let tau = spec.tau_min.unwrap_or(5.0);
        let Some(d) = draw_duration(ctx.rng, tau, b - a) else {
            continue;
        };
        let Some(w) = seek_window(ctx.residual, ctx.rng, (a, b), d, spec.nominal_power) else {
            continue;
        };
        let emitted = try_emit(
            ctx,
            &mut signals,
            name,
            Category::Housekeeping,
            spec.nominal_power,
            spec.count,
            w,
            beta,
        );
        if emitted && name == names::WASHING_MACHINE {
            ctx.gamma.note_washer_end(w.1);
            dryer_after_washer(ctx, &mut signals, w.1);
        }
    }
    signals
}

/// The tumble dryer only ever starts where a washer pulse just ended,
/// with beta1, at most once per day (its beta2 is 0).
fn dryer_after_washer(ctx: &mut RecognitionContext, signals: &mut CategorySignals, at: u32) {
    let Some(spec) = ctx.household.owned(names::TUMBLE_DRYER).cloned() else {
        return;
    };
    let beta = if ctx.gamma.day_count(names::TUMBLE_DRYER) == 0 {
        spec.beta1
    } else {
        spec.beta2
    }
    .unwrap_or(0.0);
    if !weekly_quota_left(
        ctx.household.habits.tumble_dryer_per_week,
        ctx.gamma.week_count(names::TUMBLE_DRYER),
    ) {
        return;
    }
    let room = MINUTES_PER_DAY as u32 - at.min(MINUTES_PER_DAY as u32);
    let Some(d) = draw_duration(ctx.rng, spec.tau_min.unwrap_or(60.0), room) else {
        return;
    };
    try_emit(
        ctx,
        signals,
        names::TUMBLE_DRYER,
        Category::Housekeeping,
        spec.nominal_power,
        spec.count,
        (at, at + d),
        beta,
    );
}

/// Which entertainment appliances an activity may involve.
fn entertainment_candidates(act: ActivityState) -> &'static [&'static str] {
    use names::*;
    match act {
        ActivityState::Cleaning
        | ActivityState::Cooking
        | ActivityState::WashingDishes
        | ActivityState::Eating
        | ActivityState::Laundry
        | ActivityState::Showering => &[TV, STEREO],
        ActivityState::UsingComputer | ActivityState::Homework => &[TV, STEREO, PC, LAPTOP],
        ActivityState::PlayingGame => &[TV, STEREO, GAMING_CONSOLE],
        ActivityState::Music => &[STEREO, PC, TABLET, LAPTOP],
        ActivityState::WatchingTv => &[TV, DVD_PLAYER, PC, TABLET, LAPTOP],
        _ => &[],
    }
}

/// The activity for which an appliance takes its beta1 coin.
fn primary_activity(name: &str) -> Option<ActivityState> {
    match name {
        names::TV | names::DVD_PLAYER => Some(ActivityState::WatchingTv),
        names::STEREO => Some(ActivityState::Music),
        names::PC | names::LAPTOP => Some(ActivityState::UsingComputer),
        names::GAMING_CONSOLE => Some(ActivityState::PlayingGame),
        _ => None,
    }
}

/// Entertainment runs alongside almost everything: beta1 on the matching
/// activity, beta2 in the background, beta3 when a sibling instance is on
/// or when PC/laptop/tablet stand in for a missing TV.
pub fn add_entertainment(ctx: &mut RecognitionContext) -> CategorySignals {
    let mut signals = CategorySignals::empty();
    let has_tv = ctx.household.owns(names::TV);
    let entries = ctx.chain.entries.clone();
    for (act, s, e) in entries {
        let tv_replacement = act == ActivityState::WatchingTv && !has_tv;
        let mut candidates: Vec<&str> = entertainment_candidates(act)
            .iter()
            .copied()
            .filter(|n| ctx.household.owns(n))
            .collect();
        ctx.rng.shuffle(&mut candidates);
        let (a, b) = episode_window(s, e);
        for name in candidates {
            let spec = ctx.household.owned(name).unwrap().clone();
            let probability = if tv_replacement && name != names::TV {
                // stand-in for the missing TV
                spec.beta3.unwrap_or(0.0)
            } else if ctx.gamma.is_on(name, (a, b)) {
                // a sibling instance is already running
                spec.beta3.unwrap_or(0.0)
            } else if primary_activity(name) == Some(act) {
                spec.beta1.unwrap_or(0.0)
            } else {
                spec.beta2.unwrap_or(0.0)
            };
            let tau = spec.tau_min.unwrap_or(20.0).max(1.0);
            let Some(d) = draw_duration(ctx.rng, tau, b - a) else {
                continue;
            };
            let Some(w) = seek_window(ctx.residual, ctx.rng, (a, b), d, spec.nominal_power)
            else {
                continue;
            };
            let emitted = try_emit(
                ctx,
                &mut signals,
                name,
                Category::Entertainment,
                spec.nominal_power,
                spec.count,
                w,
                probability,
            );
            if emitted && name == names::TV {
                if let Some(tv_box) = ctx.household.owned(names::TV_BOX).cloned() {
                    try_emit(
                        ctx,
                        &mut signals,
                        names::TV_BOX,
                        Category::Entertainment,
                        tv_box.nominal_power,
                        tv_box.count,
                        w,
                        tv_box.beta1.unwrap_or(1.0),
                    );
                }
            }
        }
    }
    signals
}

/// Printer only: beta1 while a computer is on, beta2 during Working or
/// Homework episodes.
pub fn add_ict(ctx: &mut RecognitionContext) -> CategorySignals {
    let mut signals = CategorySignals::empty();
    let Some(spec) = ctx.household.owned(names::PRINTER).cloned() else {
        return signals;
    };
    let entries = ctx.chain.entries.clone();
    for (act, s, e) in entries {
        let (a, b) = episode_window(s, e);
        let computer_on =
            ctx.gamma.is_on(names::PC, (a, b)) || ctx.gamma.is_on(names::LAPTOP, (a, b));
        let probability = if computer_on {
            spec.beta1.unwrap_or(0.0)
        } else if matches!(act, ActivityState::Working | ActivityState::Homework) {
            spec.beta2.unwrap_or(0.0)
        } else {
            0.0
        };
        let Some(d) = draw_duration(ctx.rng, spec.tau_min.unwrap_or(5.0), b - a) else {
            continue;
        };
        let Some(w) = seek_window(ctx.residual, ctx.rng, (a, b), d, spec.nominal_power) else {
            continue;
        };
        try_emit(
            ctx,
            &mut signals,
            names::PRINTER,
            Category::Ict,
            spec.nominal_power,
            spec.count,
            w,
            probability,
        );
    }
    signals
}

/// One full recognition pass for one person, in the fixed category order.
/// The residual is drawn down in place; the returned signals are on the
/// 60 s grid.
pub fn recognize_all(ctx: &mut RecognitionContext) -> Result<CategorySignals> {
    let mut all = CategorySignals::empty();
    all.merge(&recognize_heating(ctx));
    all.merge(&add_lighting(ctx));
    all.merge(&recognize_cooking(ctx));
    all.merge(&recognize_housekeeping(ctx));
    all.merge(&add_entertainment(ctx));
    all.merge(&add_ict(ctx));
    Ok(all)
}
