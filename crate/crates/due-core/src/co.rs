//! Combinatorial-optimization baseline: per category, a small basis of
//! representative power levels is learned from ground truth; disaggregation
//! then picks, per timestep, the level combination whose sum best matches
//! the aggregate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::SampledSeries;
use crate::types::Category;

/// Representative power levels per category. Each set contains 0 and is
/// sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBasis {
    pub levels: BTreeMap<Category, Vec<f64>>,
}

/// Exhaustive search is used while the combination count stays below this.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;
/// Beam width once exhaustive search is off the table.
pub const BEAM_WIDTH: usize = 1000;

/// 1-D K-level quantization with 0 pinned as a level: Lloyd iterations on
/// the non-zero observations, K−1 free centroids seeded at quantiles.
fn quantize(values: &[f64], k: usize) -> Vec<f64> {
    let mut nonzero: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    nonzero.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if nonzero.is_empty() {
        return vec![0.0];
    }
    let free = (k.max(2) - 1).min(nonzero.len());
    let mut centroids: Vec<f64> = (0..free)
        .map(|i| {
            let q = (i as f64 + 0.5) / free as f64;
            nonzero[((q * nonzero.len() as f64) as usize).min(nonzero.len() - 1)]
        })
        .collect();
    for _ in 0..100 {
        let mut sums = vec![0.0; free];
        let mut counts = vec![0usize; free];
        for &v in &nonzero {
            let i = centroids
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| {
                    (v - **a).abs().partial_cmp(&(v - **b).abs()).unwrap()
                })
                .unwrap()
                .0;
            sums[i] += v;
            counts[i] += 1;
        }
        let mut moved = false;
        for i in 0..free {
            if counts[i] > 0 {
                let next = sums[i] / counts[i] as f64;
                if (next - centroids[i]).abs() > 1e-9 {
                    moved = true;
                }
                centroids[i] = next;
            }
        }
        if !moved {
            break;
        }
    }
    let mut levels = vec![0.0];
    for c in centroids {
        if c > 0.0 && levels.iter().all(|&l| (l - c).abs() > 1e-9) {
            levels.push(c);
        }
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels
}

/// Learn the per-category power basis from ground-truth series.
pub fn train_co(
    ground_truth: &BTreeMap<Category, SampledSeries>,
    k: usize,
) -> Result<PowerBasis> {
    if ground_truth.is_empty() {
        return Err(Error::InsufficientData("no ground-truth categories".into()));
    }
    let mut levels = BTreeMap::new();
    for (cat, series) in ground_truth {
        if series.is_empty() {
            return Err(Error::InsufficientData(format!("empty series for {cat}")));
        }
        levels.insert(*cat, quantize(&series.values, k));
    }
    Ok(PowerBasis { levels })
}

#[derive(Clone)]
struct Assignment {
    error: f64,
    nonzero: usize,
    /// chosen level per category, in ascending category order
    chosen: Vec<f64>,
}

fn better(a: &Assignment, b: &Assignment) -> bool {
    if a.error != b.error {
        return a.error < b.error;
    }
    if a.nonzero != b.nonzero {
        return a.nonzero < b.nonzero;
    }
    a.chosen < b.chosen
}

fn solve_exhaustive(target: f64, bases: &[&[f64]]) -> Vec<f64> {
    let mut best: Option<Assignment> = None;
    let mut stack: Vec<(usize, f64, usize, Vec<f64>)> = vec![(0, 0.0, 0, Vec::new())];
    while let Some((depth, sum, nonzero, chosen)) = stack.pop() {
        if depth == bases.len() {
            let cand = Assignment {
                error: (target - sum).abs(),
                nonzero,
                chosen,
            };
            if best.as_ref().map(|b| better(&cand, b)).unwrap_or(true) {
                best = Some(cand);
            }
            continue;
        }
        // push in reverse so lower levels are explored first
        for &level in bases[depth].iter().rev() {
            let mut next = chosen.clone();
            next.push(level);
            stack.push((
                depth + 1,
                sum + level,
                nonzero + usize::from(level > 0.0),
                next,
            ));
        }
    }
    best.unwrap().chosen
}

fn solve_beam(target: f64, bases: &[&[f64]]) -> Vec<f64> {
    // widen over categories in descending max-level order so large loads
    // are placed before the beam narrows
    let mut order: Vec<usize> = (0..bases.len()).collect();
    order.sort_by(|&a, &b| {
        let ma = bases[a].last().copied().unwrap_or(0.0);
        let mb = bases[b].last().copied().unwrap_or(0.0);
        mb.partial_cmp(&ma).unwrap().then(a.cmp(&b))
    });
    let mut beam: Vec<(f64, usize, Vec<f64>)> = vec![(0.0, 0, Vec::new())];
    for &i in &order {
        let mut next = Vec::with_capacity(beam.len() * bases[i].len());
        for (sum, nonzero, chosen) in &beam {
            for &level in bases[i] {
                let mut c = chosen.clone();
                c.push(level);
                next.push((sum + level, nonzero + usize::from(level > 0.0), c));
            }
        }
        next.sort_by(|a, b| {
            let ka = ((a.0 - target).max(0.0), (a.0 - target).abs(), a.1);
            let kb = ((b.0 - target).max(0.0), (b.0 - target).abs(), b.1);
            ka.partial_cmp(&kb).unwrap()
        });
        next.truncate(BEAM_WIDTH);
        beam = next;
    }
    let best = beam
        .into_iter()
        .map(|(sum, nonzero, chosen)| Assignment {
            error: (target - sum).abs(),
            nonzero,
            chosen,
        })
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .unwrap();
    // undo the visiting order
    let mut out = vec![0.0; order.len()];
    for (slot, &i) in order.iter().enumerate() {
        out[i] = best.chosen[slot];
    }
    out
}

/// Disaggregate the aggregate against the basis. `lambda` > 0 adds a
/// switch-continuity penalty per level change relative to the previous
/// timestep (then the steps are solved sequentially).
pub fn disaggregate_co_with(
    aggregate: &SampledSeries,
    basis: &PowerBasis,
    lambda: f64,
) -> BTreeMap<Category, SampledSeries> {
    let cats: Vec<Category> = basis.levels.keys().copied().collect();
    let bases: Vec<&[f64]> = cats.iter().map(|c| basis.levels[c].as_slice()).collect();
    let combos: u128 = bases.iter().map(|b| b.len() as u128).product();
    let mut out: BTreeMap<Category, Vec<f64>> =
        cats.iter().map(|c| (*c, Vec::with_capacity(aggregate.len()))).collect();
    let mut prev: Option<Vec<f64>> = None;
    for &target in &aggregate.values {
        let chosen = if lambda > 0.0 {
            solve_with_penalty(target, &bases, prev.as_deref(), lambda)
        } else if combos <= EXHAUSTIVE_LIMIT {
            solve_exhaustive(target, &bases)
        } else {
            solve_beam(target, &bases)
        };
        for (c, &level) in cats.iter().zip(chosen.iter()) {
            out.get_mut(c).unwrap().push(level);
        }
        prev = Some(chosen);
    }
    out.into_iter()
        .map(|(c, values)| {
            (
                c,
                SampledSeries {
                    start: aggregate.start,
                    step: aggregate.step,
                    values,
                },
            )
        })
        .collect()
}

fn solve_with_penalty(
    target: f64,
    bases: &[&[f64]],
    prev: Option<&[f64]>,
    lambda: f64,
) -> Vec<f64> {
    let mut best: Option<(f64, Assignment)> = None;
    let mut stack: Vec<(usize, f64, usize, usize, Vec<f64>)> = vec![(0, 0.0, 0, 0, Vec::new())];
    while let Some((depth, sum, nonzero, switches, chosen)) = stack.pop() {
        if depth == bases.len() {
            let cand = Assignment {
                error: (target - sum).abs(),
                nonzero,
                chosen,
            };
            let cost = cand.error + lambda * switches as f64;
            let replace = match &best {
                None => true,
                Some((c, a)) => {
                    cost < *c || (cost == *c && better(&cand, a))
                }
            };
            if replace {
                best = Some((cost, cand));
            }
            continue;
        }
        for &level in bases[depth].iter().rev() {
            let switched = prev
                .map(|p| (p[depth] - level).abs() > 1e-9)
                .unwrap_or(false);
            let mut next = chosen.clone();
            next.push(level);
            stack.push((
                depth + 1,
                sum + level,
                nonzero + usize::from(level > 0.0),
                switches + usize::from(switched),
                next,
            ));
        }
    }
    best.unwrap().1.chosen
}

/// Default entry point: pure per-timestep matching, no continuity penalty.
pub fn disaggregate_co(
    aggregate: &SampledSeries,
    basis: &PowerBasis,
) -> BTreeMap<Category, SampledSeries> {
    disaggregate_co_with(aggregate, basis, 0.0)
}

impl PowerBasis {
    /// Plain text form: one `category<TAB>level,level,...` row per category.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, levels) in &self.levels {
            let row: Vec<String> = levels.iter().map(|l| format!("{l}")).collect();
            out.push_str(&format!("{c}\t{}\n", row.join(",")));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PowerBasis> {
        let mut levels = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (cat, rest) = line.split_once('\t').ok_or(Error::Parse {
                line: i + 1,
                reason: "expected category<TAB>levels".into(),
            })?;
            let mut row = Vec::new();
            for tok in rest.split(',') {
                row.push(tok.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    reason: format!("bad level '{tok}'"),
                })?);
            }
            if !row.contains(&0.0) {
                row.push(0.0);
            }
            row.sort_by(|a, b| a.partial_cmp(b).unwrap());
            levels.insert(cat.parse()?, row);
        }
        if levels.is_empty() {
            return Err(Error::InsufficientData("empty basis file".into()));
        }
        Ok(PowerBasis { levels })
    }
}
