//! End-to-end acceptance checks for the whole pipeline. Each criterion
//! prints exactly one PASS/FAIL line; the test fails if any criterion does.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use chrono::NaiveDate;

use due_core::appliance::{default_appliance, names, ApplianceSpec};
use due_core::co::{disaggregate_co, PowerBasis};
use due_core::engine::{disaggregate, simulate, EngineConfig};
use due_core::household::parse_household;
use due_core::metrics::{energy_share_error, est_acc, neea, overall_est_acc, Score};
use due_core::pretreat::learn_fridge;
use due_core::recognize::{
    add_entertainment, add_ict, recognize_cooking, recognize_heating, recognize_housekeeping,
    DeviceStateVector, RecognitionContext,
};
use due_core::sampler::{ActivityChain, RandomSource};
use due_core::series::{midnight, resample, SampledSeries};
use due_core::suncalc::sun_times;
use due_core::tou::{
    generate_synthetic_diary, parse_diary, ActivityModel, StratumRequest, SyntheticConfig,
};
use due_core::types::{ActivityState, AgeGroup, Category, DayType, Employment};

type Check = fn() -> Result<String, String>;

#[test]
fn acceptance_criteria() {
    let checks: [(&str, Check); 10] = [
        ("activity model matches counting oracle", c01_model_oracle),
        ("stochastic rows are distributions", c02_rows_sum_to_one),
        ("metric identities hold", c03_metric_identities),
        ("disaggregation conserves energy", c04_conservation),
        ("CO matches brute force with tie-breaks", c05_co_brute_force),
        ("fridge learning round-trips", c06_fridge_round_trip),
        ("activation rates calibrate to beta", c07_beta_calibration),
        ("simulate-then-recover quality floor", c08_recovery_quality),
        ("30-day run finishes in time", c09_throughput),
        ("CLI reports are byte-deterministic", c10_cli_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:2} PASS  {name} ({detail})", i + 1),
            Err(reason) => {
                failures += 1;
                println!("criterion {:2} FAIL  {name}: {reason}", i + 1);
            }
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance criterion(s) failed");
}

fn monday() -> NaiveDate {
    NaiveDate::from_ymd_opt(2013, 1, 7).unwrap()
}

const HOUSEHOLD_4P: &str = "\
person.1.employment = full-time
person.1.age_group = senior-active
person.2.employment = part-time
person.2.age_group = senior-active
person.3.employment = student
person.3.age_group = teenager
person.4.employment = student
person.4.age_group = teenager
appliance.kettle = 1
appliance.coffee maker = 1
appliance.TV = 1
appliance.TV box = 1
appliance.stereo = 1
appliance.PC = 1
appliance.laptop = 1
appliance.fridge (with a freezer) = 1
appliance.hairdryer = 1
appliance.washing machine = 1
appliance.dishwasher = 1
appliance.vacuum = 1
appliance.printer = 1
appliance.lighting = 1
appliance.modem = 1
habit.washing_machine_per_week = 2
habit.dishwasher_per_week = 4
location.latitude = 47.0
";

fn model_4p(seed: u64) -> ActivityModel {
    let config = SyntheticConfig {
        start_date: NaiveDate::from_ymd_opt(2012, 10, 1).unwrap(),
        seed,
        strata: vec![
            StratumRequest {
                employment: Employment::FullTime,
                age_group: AgeGroup::SeniorActive,
                persons: 10,
                days: 14,
            },
            StratumRequest {
                employment: Employment::PartTime,
                age_group: AgeGroup::SeniorActive,
                persons: 10,
                days: 14,
            },
            StratumRequest {
                employment: Employment::Student,
                age_group: AgeGroup::Teenager,
                persons: 10,
                days: 14,
            },
        ],
    };
    ActivityModel::estimate(&parse_diary(generate_synthetic_diary(&config).as_bytes()).unwrap())
}

// --- criterion 1 -----------------------------------------------------------

fn c01_model_oracle() -> Result<String, String> {
    let t0 = Instant::now();
    for case in 0..100u64 {
        let mut src = RandomSource::new(9000 + case);
        let mut strata = Vec::new();
        for _ in 0..1 + src.uniform_range(0, 3) {
            let req = StratumRequest {
                employment: Employment::ALL[src.uniform_range(0, 5)],
                age_group: AgeGroup::ALL[src.uniform_range(0, 4)],
                persons: 1 + src.uniform_range(0, 3) as u32,
                days: 1 + src.uniform_range(0, 5) as u32,
            };
            if !strata
                .iter()
                .any(|s: &StratumRequest| s.employment == req.employment && s.age_group == req.age_group)
            {
                strata.push(req);
            }
        }
        let text = generate_synthetic_diary(&SyntheticConfig {
            start_date: NaiveDate::from_ymd_opt(2012, 3, 5).unwrap(),
            seed: 31 + case,
            strata,
        });
        let events =
            parse_diary(text.as_bytes()).map_err(|e| format!("case {case}: parse: {e}"))?;
        let model = ActivityModel::estimate(&events);

        // Independent oracle: recount everything with plain hash maps.
        type SKey = (String, String, String);
        let mut pi: HashMap<(SKey, usize), u32> = HashMap::new();
        let mut pi_tot: HashMap<SKey, u32> = HashMap::new();
        let mut dur: HashMap<(SKey, usize), (u32, f64)> = HashMap::new();
        let mut trans: HashMap<(SKey, u16, usize, usize), u32> = HashMap::new();
        let mut trans_tot: HashMap<(SKey, u16, usize), u32> = HashMap::new();
        let mut days: BTreeMap<(String, NaiveDate), Vec<(u16, u16, ActivityState)>> =
            BTreeMap::new();
        for e in &events {
            let k: SKey = (
                e.employment.to_string(),
                e.age_group.to_string(),
                e.day_type.to_string(),
            );
            if e.start_slot == 0 {
                *pi.entry((k.clone(), e.activity.index())).or_default() += 1;
                *pi_tot.entry(k.clone()).or_default() += 1;
            }
            let d = dur.entry((k.clone(), e.activity.index())).or_default();
            d.0 += 1;
            d.1 += (e.end_slot - e.start_slot) as f64 * 5.0;
            days.entry((e.person.clone(), e.date)).or_default().push((
                e.start_slot,
                e.end_slot,
                e.activity,
            ));
        }
        for ((person, date), mut list) in days {
            list.sort();
            let day_type = due_core::types::day_type_of(date).to_string();
            for pair in list.windows(2) {
                // the person's stratum is constant within a day; take it from
                // the matching event
                let e = events
                    .iter()
                    .find(|e| e.person == person && e.date == date && e.start_slot == pair[0].0)
                    .unwrap();
                let k: SKey = (
                    e.employment.to_string(),
                    e.age_group.to_string(),
                    day_type.clone(),
                );
                *trans
                    .entry((k.clone(), pair[0].1, pair[0].2.index(), pair[1].2.index()))
                    .or_default() += 1;
                *trans_tot
                    .entry((k, pair[0].1, pair[0].2.index()))
                    .or_default() += 1;
            }
        }

        for (&(emp, age, day), stats) in model.strata() {
            let k: SKey = (emp.to_string(), age.to_string(), day.to_string());
            let want_tot = pi_tot.get(&k).copied().unwrap_or(0);
            if stats.pi_total != want_tot {
                return Err(format!("case {case}: pi_total {} != {want_tot}", stats.pi_total));
            }
            for (i, a) in ActivityState::ALL.iter().enumerate() {
                let want = pi.get(&(k.clone(), i)).copied().unwrap_or(0);
                if stats.pi_counts[i] != want {
                    return Err(format!("case {case}: pi[{a}] {} != {want}", stats.pi_counts[i]));
                }
                let (wc, ws) = dur.get(&(k.clone(), i)).copied().unwrap_or((0, 0.0));
                if stats.durations[i].count != wc || stats.durations[i].sum_min != ws {
                    return Err(format!("case {case}: duration stats differ for {a}"));
                }
            }
            for ((slot, from), row) in &stats.trans {
                let want_row_tot = trans_tot
                    .get(&(k.clone(), *slot, *from as usize))
                    .copied()
                    .unwrap_or(0);
                if row.total != want_row_tot {
                    return Err(format!("case {case}: row total differs at slot {slot}"));
                }
                for (to, &c) in row.counts.iter().enumerate() {
                    let want = trans
                        .get(&(k.clone(), *slot, *from as usize, to))
                        .copied()
                        .unwrap_or(0);
                    if c != want {
                        return Err(format!("case {case}: transition count differs"));
                    }
                }
                // the queried probability must equal the oracle ratio exactly
                let (probs, _) = model.transition_row(
                    emp,
                    age,
                    day,
                    ActivityState::ALL[*from as usize],
                    *slot,
                );
                for (to, &c) in row.counts.iter().enumerate() {
                    if probs[to] != c as f64 / row.total as f64 {
                        return Err(format!("case {case}: probability not count ratio"));
                    }
                }
            }
            if stats.pi_total > 0 {
                let (probs, _) = model.initial_distribution(emp, age, day);
                for (i, &c) in stats.pi_counts.iter().enumerate() {
                    if probs[i] != c as f64 / stats.pi_total as f64 {
                        return Err(format!("case {case}: initial distribution not count ratio"));
                    }
                }
            }
        }
        // no stratum lost by the model
        let model_count = model.strata().count();
        let mut seen: Vec<SKey> = events
            .iter()
            .map(|e| {
                (
                    e.employment.to_string(),
                    e.age_group.to_string(),
                    e.day_type.to_string(),
                )
            })
            .collect();
        seen.sort();
        seen.dedup();
        if model_count != seen.len() {
            return Err(format!("case {case}: {model_count} strata != {}", seen.len()));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    if secs >= 5.0 {
        return Err(format!("100 diaries took {secs:.2} s (budget 5 s)"));
    }
    Ok(format!("100 diaries, exact equality, {secs:.2} s"))
}

// --- criterion 2 -----------------------------------------------------------

fn c02_rows_sum_to_one() -> Result<String, String> {
    let model = model_4p(17);
    let mut src = RandomSource::new(42);
    for case in 0..1000 {
        let emp = Employment::ALL[src.uniform_range(0, 5)];
        let age = AgeGroup::ALL[src.uniform_range(0, 4)];
        let day = DayType::ALL[src.uniform_range(0, 3)];
        let (pi, _) = model.initial_distribution(emp, age, day);
        let sum: f64 = pi.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("case {case}: initial distribution sums to {sum}"));
        }
        let from = ActivityState::ALL[src.uniform_range(0, ActivityState::ALL.len())];
        let slot = src.uniform_range(1, 288) as u16;
        let (row, _) = model.transition_row(emp, age, day, from, slot);
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("case {case}: transition row sums to {sum}"));
        }
    }
    Ok("1000 fuzzed queries, all sums within 1e-9".into())
}

// --- criterion 3 -----------------------------------------------------------

fn c03_metric_identities() -> Result<String, String> {
    let start = midnight(monday());
    let mut src = RandomSource::new(7);
    let mut scored = 0;
    for case in 0..1000 {
        let est = SampledSeries::new(
            start,
            900,
            (0..96)
                .map(|_| {
                    if src.bernoulli(0.3) {
                        0.0
                    } else {
                        src.uniform_open() * 2000.0
                    }
                })
                .collect(),
        )
        .unwrap();
        let truth = SampledSeries::new(
            start,
            900,
            (0..96)
                .map(|_| {
                    if src.bernoulli(0.3) {
                        0.0
                    } else {
                        src.uniform_open() * 2000.0
                    }
                })
                .collect(),
        )
        .unwrap();
        match (est_acc(&est, &truth).unwrap(), neea(&est, &truth).unwrap()) {
            (Score::Value(a), Score::Value(n)) => {
                scored += 1;
                if (a - (1.0 - n / 2.0)).abs() > 1e-12 {
                    return Err(format!("case {case}: est_acc {a} vs 1 - neea/2"));
                }
            }
            (Score::Unscored, Score::Unscored) => {}
            _ => return Err(format!("case {case}: inconsistent scoring")),
        }
    }
    // all-zero estimate scores exactly one half
    let zeros = SampledSeries::new(start, 900, vec![0.0; 96]).unwrap();
    let truth = SampledSeries::new(start, 900, vec![123.0; 96]).unwrap();
    if est_acc(&zeros, &truth).unwrap() != Score::Value(0.5) {
        return Err("all-zero estimate does not score 0.5".into());
    }
    // share errors cancel
    for case in 0..100 {
        let mut est = BTreeMap::new();
        let mut tru = BTreeMap::new();
        for c in Category::ALL {
            est.insert(
                c,
                SampledSeries::new(start, 900, vec![src.uniform_open() * 500.0; 96]).unwrap(),
            );
            tru.insert(
                c,
                SampledSeries::new(start, 900, vec![src.uniform_open() * 500.0; 96]).unwrap(),
            );
        }
        let ese = energy_share_error(&est, &tru).unwrap();
        let sum: f64 = ese.values().sum();
        if sum.abs() > 1e-9 {
            return Err(format!("case {case}: share errors sum to {sum}"));
        }
    }
    Ok(format!("{scored} scored pairs match to 1e-12, shares cancel"))
}

// --- criterion 4 -----------------------------------------------------------

fn c04_conservation() -> Result<String, String> {
    let model = model_4p(23);
    let mut worst: f64 = 0.0;
    for case in 0..10u64 {
        let mut src = RandomSource::new(400 + case);
        let mut text = String::new();
        let persons = 1 + src.uniform_range(0, 4);
        for p in 1..=persons {
            let (emp, age) = match src.uniform_range(0, 3) {
                0 => ("full-time", "senior-active"),
                1 => ("part-time", "senior-active"),
                _ => ("student", "teenager"),
            };
            text.push_str(&format!(
                "person.{p}.employment = {emp}\nperson.{p}.age_group = {age}\n"
            ));
        }
        text.push_str(
            "appliance.kettle = 1\nappliance.stove = 1\nappliance.TV = 1\n\
             appliance.PC = 1\nappliance.fridge (with a freezer) = 1\n\
             appliance.hairdryer = 1\nappliance.washing machine = 1\n\
             appliance.dishwasher = 1\nappliance.vacuum = 1\nappliance.printer = 1\n\
             appliance.lighting = 1\nappliance.modem = 1\nlocation.latitude = 47.0\n",
        );
        let household = parse_household(&text).map_err(|e| format!("case {case}: {e}"))?;
        let sim = simulate(&household, &model, 100 + case, monday(), 7)
            .map_err(|e| format!("case {case}: simulate: {e}"))?;
        let aggregate = sim.aggregate();
        let config = EngineConfig {
            seed: 200 + case,
            ..EngineConfig::default()
        };
        let result = disaggregate(&aggregate, &household, &model, &config)
            .map_err(|e| format!("case {case}: disaggregate: {e}"))?;
        let rebuilt = result.aggregate();
        for (t, (a, b)) in rebuilt.values.iter().zip(aggregate.values.iter()).enumerate() {
            let gap = (a - b).abs();
            worst = worst.max(gap);
            if gap > 1e-6 {
                return Err(format!("case {case}: slot {t} off by {gap:.3e} W"));
            }
        }
    }
    Ok(format!("10 households x 7 days, worst gap {worst:.2e} W"))
}

// --- criterion 5 -----------------------------------------------------------

fn c05_co_brute_force() -> Result<String, String> {
    let start = midnight(monday());
    let mut src = RandomSource::new(55);
    let mut steps = 0;
    for case in 0..20 {
        let n_cats = 2 + src.uniform_range(0, 3); // 2..=4
        let mut levels: BTreeMap<Category, Vec<f64>> = BTreeMap::new();
        for c in Category::ALL.iter().take(n_cats) {
            let n_levels = 2 + src.uniform_range(0, 2); // 2..=3
            let mut ls = vec![0.0];
            for _ in 1..n_levels {
                // coarse grid provokes exact ties
                ls.push((1 + src.uniform_range(0, 8)) as f64 * 50.0);
            }
            ls.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ls.dedup();
            levels.insert(*c, ls);
        }
        let basis = PowerBasis { levels };
        let aggregate = SampledSeries::new(
            start,
            900,
            (0..96)
                .map(|_| (src.uniform_range(0, 40) as f64) * 25.0)
                .collect(),
        )
        .unwrap();
        let solved = disaggregate_co(&aggregate, &basis);
        let cats: Vec<Category> = basis.levels.keys().copied().collect();
        for (t, &target) in aggregate.values.iter().enumerate() {
            steps += 1;
            let want = brute_force_co(target, &cats, &basis);
            for (i, c) in cats.iter().enumerate() {
                let got = solved[c].values[t];
                if got != want[i] {
                    return Err(format!(
                        "case {case} slot {t} {c}: chose {got}, oracle {}",
                        want[i]
                    ));
                }
            }
        }
    }
    Ok(format!("{steps} steps, exact match incl. tie-breaks"))
}

/// Odometer enumeration with the documented tie-break: smallest absolute
/// error, then fewest running categories, then lexicographically smallest
/// level vector in ascending category order.
fn brute_force_co(target: f64, cats: &[Category], basis: &PowerBasis) -> Vec<f64> {
    let bases: Vec<&Vec<f64>> = cats.iter().map(|c| &basis.levels[c]).collect();
    let mut idx = vec![0usize; bases.len()];
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    loop {
        let chosen: Vec<f64> = idx.iter().zip(&bases).map(|(&i, b)| b[i]).collect();
        let sum: f64 = chosen.iter().sum();
        let err = (target - sum).abs();
        let nz = chosen.iter().filter(|&&l| l > 0.0).count();
        let replace = match &best {
            None => true,
            Some((be, bn, bc)) => (err, nz, &chosen) < (*be, *bn, bc),
        };
        if replace {
            best = Some((err, nz, chosen));
        }
        let mut d = bases.len();
        loop {
            if d == 0 {
                return best.unwrap().2;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < bases[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
}

// --- criterion 6 -----------------------------------------------------------

fn c06_fridge_round_trip() -> Result<String, String> {
    // Cycle lengths dividing the 150-min night window keep every night mean
    // exact regardless of phase, so the histogram step is phase-neutral.
    const CYCLES: [u32; 4] = [30, 50, 75, 150];
    let mut worst_rel: f64 = 0.0;
    for case in 0..50u64 {
        let mut src = RandomSource::new(600 + case);
        let cycle = CYCLES[src.uniform_range(0, CYCLES.len())];
        let max_active = (cycle as f64 * 0.6 / 5.0).floor() as usize;
        let min_active = ((cycle as f64 * 0.1 / 5.0).ceil() as usize).max(1);
        let active = 5 * src.uniform_range(min_active, max_active + 1) as u32;
        let duty = active as f64 / cycle as f64;
        let nominal = 60.0 + src.uniform_open() * 60.0;
        let phase = src.uniform_range(0, cycle as usize) as u32;
        let days = 30;
        let minutes: Vec<f64> = (0..days * 1440)
            .map(|m| {
                if (m as u32 + cycle - phase % cycle) % cycle < active {
                    nominal
                } else {
                    0.0
                }
            })
            .collect();
        let wave = SampledSeries::new(midnight(monday()), 60, minutes).unwrap();
        let history = resample(&wave, 900).unwrap();
        let spec = ApplianceSpec {
            beta2: Some(duty),
            ..default_appliance(names::FRIDGE_FREEZER).unwrap()
        };
        let est = learn_fridge(&history, &spec).map_err(|e| format!("case {case}: {e}"))?;
        let rel = (est.nominal_power - nominal).abs() / nominal;
        worst_rel = worst_rel.max(rel);
        if rel > 0.05 {
            return Err(format!(
                "case {case}: nominal {:.1} vs true {nominal:.1} ({:.1}%)",
                est.nominal_power,
                rel * 100.0
            ));
        }
        if est.cycle_min.abs_diff(cycle) > 5 {
            return Err(format!(
                "case {case}: cycle {} vs true {cycle}",
                est.cycle_min
            ));
        }
    }
    Ok(format!(
        "50 parameterizations, worst nominal error {:.2}%",
        worst_rel * 100.0
    ))
}

// --- criterion 7 -----------------------------------------------------------

struct RateFixture {
    household: due_core::household::HouseholdProfile,
}

impl RateFixture {
    fn new() -> Self {
        RateFixture {
            household: parse_household(HOUSEHOLD_4P).unwrap(),
        }
    }

    /// Run one recognizer 10 000 times with unconstrained budget and count
    /// how often the named appliance is activated.
    fn rate(
        &self,
        chain: &ActivityChain,
        appliance: &str,
        run: impl Fn(&mut RecognitionContext) -> due_core::recognize::CategorySignals,
    ) -> f64 {
        let mut hits = 0u32;
        for seed in 0..10_000 {
            let mut residual =
                SampledSeries::new(midnight(monday()), 900, vec![1e9; 96]).unwrap();
            let mut gamma = DeviceStateVector::new();
            let mut rng = RandomSource::new(77_000 + seed);
            let mut ctx = RecognitionContext {
                residual: &mut residual,
                chain,
                person: 0,
                household: &self.household,
                gamma: &mut gamma,
                rng: &mut rng,
                sun: sun_times(monday(), 47.0).unwrap(),
            };
            run(&mut ctx);
            if gamma.day_count(appliance) > 0 {
                hits += 1;
            }
        }
        hits as f64 / 10_000.0
    }
}

fn c07_beta_calibration() -> Result<String, String> {
    let f = RateFixture::new();
    let chain_of = |entries: Vec<(ActivityState, u16, u16)>| ActivityChain {
        person: 0,
        date: monday(),
        entries,
    };

    // hairdryer after a shower: beta1 = 0.2
    let shower = chain_of(vec![
        (ActivityState::Sleeping, 0, 84),
        (ActivityState::Showering, 84, 90),
        (ActivityState::Sleeping, 90, 288),
    ]);
    let r_hair = f.rate(&shower, names::HAIRDRYER, recognize_heating);
    if (r_hair - 0.2).abs() > 0.02 {
        return Err(format!("hairdryer rate {r_hair:.3}, want 0.2"));
    }

    // kettle-only household at breakfast: beta1 = 0.3
    let mut kettle_only = RateFixture::new();
    kettle_only
        .household
        .inventory
        .retain(|a| a.category != Category::Cooking || a.name == names::KETTLE);
    let breakfast = chain_of(vec![
        (ActivityState::Sleeping, 0, 84),
        (ActivityState::Cooking, 84, 96), // 07:00, breakfast window
        (ActivityState::Sleeping, 96, 288),
    ]);
    let r_kettle = kettle_only.rate(&breakfast, names::KETTLE, recognize_cooking);
    if (r_kettle - 0.3).abs() > 0.02 {
        return Err(format!("kettle rate {r_kettle:.3}, want 0.3"));
    }

    // television while watching: beta1 = 0.9
    let tv = chain_of(vec![
        (ActivityState::Sleeping, 0, 240),
        (ActivityState::WatchingTv, 240, 264),
        (ActivityState::Sleeping, 264, 288),
    ]);
    let r_tv = f.rate(&tv, names::TV, add_entertainment);
    if (r_tv - 0.9).abs() > 0.02 {
        return Err(format!("television rate {r_tv:.3}, want 0.9"));
    }

    // printer while working, no computer running: beta2 = 0.1
    let work = chain_of(vec![
        (ActivityState::Sleeping, 0, 108),
        (ActivityState::Working, 108, 180),
        (ActivityState::Sleeping, 180, 288),
    ]);
    let r_printer = f.rate(&work, names::PRINTER, add_ict);
    if (r_printer - 0.1).abs() > 0.02 {
        return Err(format!("printer rate {r_printer:.3}, want 0.1"));
    }

    // a second dishwasher run the same day never happens: beta2 = 0
    let dishes_twice = chain_of(vec![
        (ActivityState::Sleeping, 0, 120),
        (ActivityState::WashingDishes, 120, 132),
        (ActivityState::Sleeping, 132, 216),
        (ActivityState::WashingDishes, 216, 228),
        (ActivityState::Sleeping, 228, 288),
    ]);
    let mut second_runs = 0;
    for seed in 0..10_000 {
        let mut residual = SampledSeries::new(midnight(monday()), 900, vec![1e9; 96]).unwrap();
        let mut gamma = DeviceStateVector::new();
        gamma.start_week();
        gamma.start_day();
        let mut rng = RandomSource::new(88_000 + seed);
        let mut ctx = RecognitionContext {
            residual: &mut residual,
            chain: &dishes_twice,
            person: 0,
            household: &f.household,
            gamma: &mut gamma,
            rng: &mut rng,
            sun: sun_times(monday(), 47.0).unwrap(),
        };
        recognize_housekeeping(&mut ctx);
        if gamma.day_count(names::DISHWASHER) > 1 {
            second_runs += 1;
        }
    }
    if second_runs != 0 {
        return Err(format!("{second_runs} second dishwasher runs, want 0"));
    }

    Ok(format!(
        "rates at 10k trials: hairdryer {r_hair:.3}, kettle {r_kettle:.3}, \
         TV {r_tv:.3}, printer {r_printer:.3}, repeat dishwasher 0"
    ))
}

// --- criteria 8 and 9 ------------------------------------------------------

fn c08_recovery_quality() -> Result<String, String> {
    let household = parse_household(HOUSEHOLD_4P).unwrap();
    let model = model_4p(31);
    let sim = simulate(&household, &model, 1000, monday(), 30).unwrap();
    let aggregate = sim.aggregate();
    let mut accs = Vec::new();
    let mut worst_ese: f64 = 0.0;
    for seed in 1..=20u64 {
        let config = EngineConfig {
            seed,
            ..EngineConfig::default()
        };
        let result = disaggregate(&aggregate, &household, &model, &config)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        match overall_est_acc(&result.categories, &sim.categories).unwrap() {
            Score::Value(a) => accs.push(a),
            Score::Unscored => return Err(format!("seed {seed}: unscored accuracy")),
        }
        let ese = energy_share_error(&result.categories, &sim.categories)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        for (c, pts) in ese {
            worst_ese = worst_ese.max(pts.abs());
            if pts.abs() > 20.0 {
                return Err(format!("seed {seed}: {c} share error {pts:.1} points"));
            }
        }
    }
    accs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = (accs[9] + accs[10]) / 2.0;
    if median < 0.5 {
        return Err(format!("median accuracy {median:.3} below 0.5"));
    }
    Ok(format!(
        "20 seeds: median accuracy {median:.3}, worst share error {worst_ese:.1} points"
    ))
}

fn c09_throughput() -> Result<String, String> {
    let household = parse_household(HOUSEHOLD_4P).unwrap();
    let model = model_4p(31);
    let sim = simulate(&household, &model, 1000, monday(), 30).unwrap();
    let aggregate = sim.aggregate();
    let t0 = Instant::now();
    let config = EngineConfig {
        seed: 5,
        ..EngineConfig::default()
    };
    disaggregate(&aggregate, &household, &model, &config).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!("30 days took {secs:.1} s (budget 60 s)"));
    }
    Ok(format!("30 days disaggregated in {secs:.2} s"))
}

// --- criterion 10 ----------------------------------------------------------

fn c10_cli_determinism() -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_due-bench");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    std::fs::write(root.join("household.kv"), HOUSEHOLD_4P).map_err(|e| e.to_string())?;
    let diary = generate_synthetic_diary(&SyntheticConfig {
        start_date: NaiveDate::from_ymd_opt(2012, 10, 1).unwrap(),
        seed: 31,
        strata: vec![
            StratumRequest {
                employment: Employment::FullTime,
                age_group: AgeGroup::SeniorActive,
                persons: 10,
                days: 14,
            },
            StratumRequest {
                employment: Employment::PartTime,
                age_group: AgeGroup::SeniorActive,
                persons: 10,
                days: 14,
            },
            StratumRequest {
                employment: Employment::Student,
                age_group: AgeGroup::Teenager,
                persons: 10,
                days: 14,
            },
        ],
    });
    std::fs::write(root.join("diary.tsv"), diary).map_err(|e| e.to_string())?;
    std::fs::write(
        root.join("sim.conf"),
        "household = household.kv\ndiary = diary.tsv\nstart_date = 2013-01-07\n\
         days = 9\nseed = 5\nout = dataset\n",
    )
    .map_err(|e| e.to_string())?;
    run_ok(bin, &["simulate", "--config"], root.join("sim.conf").as_path(), &[])?;
    std::fs::write(
        root.join("run.conf"),
        "dataset.dir = dataset\ndataset.channel_map = dataset/channels.map\n\
         household = household.kv\ndiary = diary.tsv\ntrain_days = 6\ntest_days = 3\n\
         seed = 11\nalgorithms = due,co\n",
    )
    .map_err(|e| e.to_string())?;
    run_ok(bin, &["run", "--config"], root.join("run.conf").as_path(), &["--out", "r1"])?;
    run_ok(bin, &["run", "--config"], root.join("run.conf").as_path(), &["--out", "r2"])?;

    let mut compared = 0;
    let entries = std::fs::read_dir(root.join("r1")).map_err(|e| e.to_string())?;
    for entry in entries {
        let entry = entry.map_err(|e| e.to_string())?;
        let name = entry.file_name().to_string_lossy().to_string();
        if name == "timings.tsv" {
            continue; // wall-clock measurements are exempt
        }
        let a = std::fs::read(entry.path()).map_err(|e| e.to_string())?;
        let b = std::fs::read(root.join("r2").join(&name))
            .map_err(|e| format!("{name} missing in second run: {e}"))?;
        if a != b {
            return Err(format!("{name} differs between identical runs"));
        }
        compared += 1;
    }
    if compared < 7 {
        return Err(format!("only {compared} report files produced"));
    }
    Ok(format!("{compared} report files byte-identical across reruns"))
}

fn run_ok(bin: &str, pre: &[&str], config: &Path, post: &[&str]) -> Result<(), String> {
    let out = Command::new(bin)
        .args(pre)
        .arg(config)
        .args(post)
        .current_dir(config.parent().unwrap())
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{bin} {pre:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(())
}
