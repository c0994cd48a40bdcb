//! License-free synthetic diary generator, a stand-in for a national
//! time-of-use survey. Emits plausible daily rhythms: sleep at night,
//! work on weekdays for employed strata, meals in the usual windows and
//! housekeeping scattered over the day.
//!
//! The generator is deterministic under its seed. Its midnight activity
//! distribution is fixed (`MIDNIGHT_SLEEP_PROB` Sleeping, the rest
//! WatchingTV) so estimator recovery can be checked against known truth.

use chrono::NaiveDate;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

use crate::types::{day_type_of, ActivityState, AgeGroup, DayType, Employment};

/// Probability that a diary day starts asleep.
pub const MIDNIGHT_SLEEP_PROB: f64 = 0.9;

#[derive(Debug, Clone)]
pub struct StratumRequest {
    pub employment: Employment,
    pub age_group: AgeGroup,
    pub persons: u32,
    pub days: u32,
}

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub start_date: NaiveDate,
    pub seed: u64,
    pub strata: Vec<StratumRequest>,
}

/// Generate a diary file (tab-separated, header row) covering the requested
/// strata. Byte-identical for equal configs.
pub fn generate_synthetic_diary(config: &SyntheticConfig) -> String {
    let mut out = String::new();
    out.push_str("person\temployment\tage_group\tdate\tactivity\tstart\tend\n");
    let mut person_counter = 0u32;
    for req in &config.strata {
        for p in 0..req.persons {
            person_counter += 1;
            let person_id = format!("p{person_counter:04}");
            let mut rng = ChaCha8Rng::seed_from_u64(
                config
                    .seed
                    .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    .wrapping_add(((person_counter as u64) << 16) ^ p as u64),
            );
            for d in 0..req.days {
                let date = config.start_date + chrono::Duration::days(d as i64);
                let day_type = day_type_of(date);
                let plan = day_plan(&mut rng, req.employment, day_type);
                for (activity, start, end) in plan {
                    let _ = writeln!(
                        out,
                        "{person_id}\t{}\t{}\t{date}\t{}\t{}\t{}",
                        req.employment,
                        req.age_group,
                        activity,
                        slot_time(start),
                        slot_time(end),
                    );
                }
            }
        }
    }
    out
}

fn slot_time(slot: u16) -> String {
    format!("{:02}:{:02}", slot / 12, (slot % 12) * 5)
}

/// Plan of one day as tiling (activity, start, end) slots.
fn day_plan(
    rng: &mut ChaCha8Rng,
    employment: Employment,
    day_type: DayType,
) -> Vec<(ActivityState, u16, u16)> {
    let mut plan: Vec<(ActivityState, u16, u16)> = Vec::new();
    let mut cursor: u16 = 0;
    let mut push = |plan: &mut Vec<(ActivityState, u16, u16)>, cursor: &mut u16, act, len: u16| {
        let end = (*cursor + len).min(288);
        if end > *cursor {
            // merge with the previous block when the activity repeats
            if let Some(last) = plan.last_mut() {
                if last.0 == act && last.2 == *cursor {
                    last.2 = end;
                    *cursor = end;
                    return;
                }
            }
            plan.push((act, *cursor, end));
            *cursor = end;
        }
    };

    let works = matches!(
        employment,
        Employment::FullTime | Employment::PartTime | Employment::Student
    ) && day_type == DayType::Weekday;

    // Midnight: mostly asleep, occasionally a late movie.
    if rng.gen::<f64>() >= MIDNIGHT_SLEEP_PROB {
        push(&mut plan, &mut cursor, ActivityState::WatchingTv, rng.gen_range(4..=14));
    }
    let wake: u16 = if works {
        78 + rng.gen_range(0..=12) // 06:30 - 07:30
    } else {
        90 + rng.gen_range(0..=18) // 07:30 - 09:00
    };
    let sleep_len = wake.saturating_sub(cursor);
    push(&mut plan, &mut cursor, ActivityState::Sleeping, sleep_len);
    if rng.gen::<f64>() < 0.7 {
        push(&mut plan, &mut cursor, ActivityState::Showering, rng.gen_range(2..=4));
    }
    push(&mut plan, &mut cursor, ActivityState::Eating, rng.gen_range(4..=7));

    if works {
        let work_act = if employment == Employment::Student {
            ActivityState::Homework
        } else {
            ActivityState::Working
        };
        let block = 144u16.saturating_sub(cursor);
        push(&mut plan, &mut cursor, work_act, block);
        push(&mut plan, &mut cursor, ActivityState::Eating, rng.gen_range(6..=10));
        let block = 207u16.saturating_sub(cursor);
        push(&mut plan, &mut cursor, work_act, block);
        leisure_until(rng, &mut plan, &mut cursor, 216, &mut push);
    } else {
        leisure_until(rng, &mut plan, &mut cursor, 140, &mut push);
        push(&mut plan, &mut cursor, ActivityState::Eating, rng.gen_range(6..=10));
        leisure_until(rng, &mut plan, &mut cursor, 216, &mut push);
    }

    // Dinner block around 18:00-19:00.
    push(&mut plan, &mut cursor, ActivityState::Cooking, rng.gen_range(5..=8));
    push(&mut plan, &mut cursor, ActivityState::Eating, rng.gen_range(5..=8));
    if rng.gen::<f64>() < 0.5 {
        push(&mut plan, &mut cursor, ActivityState::WashingDishes, rng.gen_range(2..=4));
    }
    let bedtime = 268 + rng.gen_range(0..=14); // 22:20 - 23:30
    while cursor < bedtime {
        let act = match rng.gen_range(0..4) {
            0 => ActivityState::WatchingTv,
            1 => ActivityState::UsingComputer,
            2 => ActivityState::Music,
            _ => ActivityState::WatchingTv,
        };
        let len = rng.gen_range(8..=20).min(bedtime - cursor);
        push(&mut plan, &mut cursor, act, len.max(1));
    }
    let tail = 288 - cursor;
    push(&mut plan, &mut cursor, ActivityState::Sleeping, tail);
    plan
}

fn leisure_until<F>(
    rng: &mut ChaCha8Rng,
    plan: &mut Vec<(ActivityState, u16, u16)>,
    cursor: &mut u16,
    target: u16,
    push: &mut F,
) where
    F: FnMut(&mut Vec<(ActivityState, u16, u16)>, &mut u16, ActivityState, u16),
{
    const LEISURE: [ActivityState; 8] = [
        ActivityState::Cleaning,
        ActivityState::UsingComputer,
        ActivityState::Outdoor,
        ActivityState::Music,
        ActivityState::PlayingGame,
        ActivityState::Laundry,
        ActivityState::WatchingTv,
        ActivityState::Outdoor,
    ];
    while *cursor < target {
        let act = LEISURE[rng.gen_range(0..LEISURE.len())];
        let len = rng.gen_range(6u16..=18).min(target - *cursor);
        push(plan, cursor, act, len.max(1));
    }
}
