//! Evaluation metrics for disaggregation quality: estimation accuracy,
//! normalized errors, RMSE, energy shares and thresholded event scores.
//!
//! Categories whose ground truth carries no energy are flagged unscored
//! rather than producing NaNs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::SampledSeries;
use crate::types::Category;

/// A metric value that may be undefined for degenerate inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Score {
    Value(f64),
    Unscored,
}

impl Score {
    pub fn value(self) -> Option<f64> {
        match self {
            Score::Value(v) => Some(v),
            Score::Unscored => None,
        }
    }
}

impl std::fmt::Display for Score {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Score::Value(v) => write!(f, "{v:.4}"),
            Score::Unscored => f.write_str("NA"),
        }
    }
}

fn check_aligned(estimate: &SampledSeries, truth: &SampledSeries) -> Result<()> {
    if estimate.len() != truth.len() || estimate.step != truth.step {
        return Err(Error::InvalidSeries(format!(
            "series not aligned: {} x {} s vs {} x {} s",
            estimate.len(),
            estimate.step,
            truth.len(),
            truth.step
        )));
    }
    Ok(())
}

/// Root mean square error in watts.
pub fn rmse(estimate: &SampledSeries, truth: &SampledSeries) -> Result<f64> {
    check_aligned(estimate, truth)?;
    if truth.is_empty() {
        return Err(Error::InvalidSeries("empty series".into()));
    }
    let ss: f64 = estimate
        .values
        .iter()
        .zip(truth.values.iter())
        .map(|(e, t)| (e - t) * (e - t))
        .sum();
    Ok((ss / truth.len() as f64).sqrt())
}

/// Normalized disaggregation error: sum of squared errors over sum of
/// squared truth.
pub fn nde(estimate: &SampledSeries, truth: &SampledSeries) -> Result<Score> {
    check_aligned(estimate, truth)?;
    let denom: f64 = truth.values.iter().map(|t| t * t).sum();
    if denom == 0.0 {
        return Ok(Score::Unscored);
    }
    let num: f64 = estimate
        .values
        .iter()
        .zip(truth.values.iter())
        .map(|(e, t)| (e - t) * (e - t))
        .sum();
    Ok(Score::Value(num / denom))
}

/// Normalized error in total energy assigned: sum of absolute errors over
/// total true energy.
pub fn neea(estimate: &SampledSeries, truth: &SampledSeries) -> Result<Score> {
    check_aligned(estimate, truth)?;
    let denom: f64 = truth.values.iter().sum();
    if denom == 0.0 {
        return Ok(Score::Unscored);
    }
    let num: f64 = estimate
        .values
        .iter()
        .zip(truth.values.iter())
        .map(|(e, t)| (e - t).abs())
        .sum();
    Ok(Score::Value(num / denom))
}

/// Estimation accuracy: 1 minus half the normalized absolute error. An
/// all-zero estimate scores exactly 0.5.
pub fn est_acc(estimate: &SampledSeries, truth: &SampledSeries) -> Result<Score> {
    Ok(match neea(estimate, truth)? {
        Score::Value(v) => Score::Value(1.0 - v / 2.0),
        Score::Unscored => Score::Unscored,
    })
}

/// Overall estimation accuracy across categories: one normalized error over
/// the summed absolute errors of all categories against total true energy.
pub fn overall_est_acc(
    estimates: &BTreeMap<Category, SampledSeries>,
    truths: &BTreeMap<Category, SampledSeries>,
) -> Result<Score> {
    let mut err = 0.0;
    let mut total = 0.0;
    for (cat, truth) in truths {
        total += truth.values.iter().sum::<f64>();
        match estimates.get(cat) {
            Some(est) => {
                check_aligned(est, truth)?;
                err += est
                    .values
                    .iter()
                    .zip(truth.values.iter())
                    .map(|(e, t)| (e - t).abs())
                    .sum::<f64>();
            }
            None => err += truth.values.iter().sum::<f64>(),
        }
    }
    if total == 0.0 {
        return Ok(Score::Unscored);
    }
    Ok(Score::Value(1.0 - err / (2.0 * total)))
}

/// Per-category energy shares (fractions of the summed energy).
pub fn energy_shares(series: &BTreeMap<Category, SampledSeries>) -> Result<BTreeMap<Category, f64>> {
    let total: f64 = series.values().map(|s| s.values.iter().sum::<f64>()).sum();
    if total <= 0.0 {
        return Err(Error::InvalidSeries("zero total energy".into()));
    }
    Ok(series
        .iter()
        .map(|(c, s)| (*c, s.values.iter().sum::<f64>() / total))
        .collect())
}

/// Energy share error per category, in percentage points (estimated share
/// minus true share). The entries sum to zero.
pub fn energy_share_error(
    estimates: &BTreeMap<Category, SampledSeries>,
    truths: &BTreeMap<Category, SampledSeries>,
) -> Result<BTreeMap<Category, f64>> {
    let est = energy_shares(estimates)?;
    let tru = energy_shares(truths)?;
    let mut out = BTreeMap::new();
    for c in Category::ALL {
        let e = est.get(&c).copied().unwrap_or(0.0);
        let t = tru.get(&c).copied().unwrap_or(0.0);
        if est.contains_key(&c) || tru.contains_key(&c) {
            out.insert(c, (e - t) * 100.0);
        }
    }
    Ok(out)
}

/// Thresholded on/off event scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventScores {
    pub acc: f64,
    pub precision: Score,
    pub recall: Score,
    pub f: Score,
}

/// Compare per-timestep on/off states at the given threshold.
pub fn event_metrics(
    estimate: &SampledSeries,
    truth: &SampledSeries,
    on_threshold: f64,
) -> Result<EventScores> {
    check_aligned(estimate, truth)?;
    if on_threshold <= 0.0 {
        return Err(Error::Config("on threshold must be positive".into()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0u64, 0u64, 0u64, 0u64);
    for (e, t) in estimate.values.iter().zip(truth.values.iter()) {
        match (*e >= on_threshold, *t >= on_threshold) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let total = (tp + fp + fn_ + tn) as f64;
    let acc = (tp + tn) as f64 / total;
    let precision = if tp + fp > 0 {
        Score::Value(tp as f64 / (tp + fp) as f64)
    } else {
        Score::Unscored
    };
    let recall = if tp + fn_ > 0 {
        Score::Value(tp as f64 / (tp + fn_) as f64)
    } else {
        Score::Unscored
    };
    let f = match (precision, recall) {
        (Score::Value(p), Score::Value(r)) if p + r > 0.0 => Score::Value(2.0 * p * r / (p + r)),
        (Score::Value(_), Score::Value(_)) => Score::Value(0.0),
        _ => Score::Unscored,
    };
    Ok(EventScores {
        acc,
        precision,
        recall,
        f,
    })
}

/// Default on/off threshold for event metrics, watts.
pub const DEFAULT_ON_THRESHOLD: f64 = 5.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub rmse: f64,
    pub nde: Score,
    pub neea: Score,
    pub est_acc: Score,
    pub energy_share_est: f64,
    pub energy_share_true: f64,
    pub ese_points: f64,
    pub events: EventScores,
}

/// Full per-category and overall report for one algorithm run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_category: BTreeMap<Category, CategoryMetrics>,
    pub overall_est_acc: Score,
}

impl MetricReport {
    pub fn compute(
        estimates: &BTreeMap<Category, SampledSeries>,
        truths: &BTreeMap<Category, SampledSeries>,
    ) -> Result<MetricReport> {
        let est_shares = energy_shares(estimates)?;
        let true_shares = energy_shares(truths)?;
        let ese = energy_share_error(estimates, truths)?;
        let mut per_category = BTreeMap::new();
        for (cat, truth) in truths {
            let zero = SampledSeries::zeros(truth.start, truth.step, truth.len());
            let est = estimates.get(cat).unwrap_or(&zero);
            per_category.insert(
                *cat,
                CategoryMetrics {
                    rmse: rmse(est, truth)?,
                    nde: nde(est, truth)?,
                    neea: neea(est, truth)?,
                    est_acc: est_acc(est, truth)?,
                    energy_share_est: est_shares.get(cat).copied().unwrap_or(0.0),
                    energy_share_true: true_shares.get(cat).copied().unwrap_or(0.0),
                    ese_points: ese.get(cat).copied().unwrap_or(0.0),
                    events: event_metrics(est, truth, DEFAULT_ON_THRESHOLD)?,
                },
            );
        }
        Ok(MetricReport {
            per_category,
            overall_est_acc: overall_est_acc(estimates, truths)?,
        })
    }

    /// Tab-separated table, one category per row.
    pub fn to_table(&self) -> String {
        let mut out = String::from(
            "category\trmse_w\tnde\tneea\test_acc\tshare_est\tshare_true\tese_points\tacc\tf\n",
        );
        for (cat, m) in &self.per_category {
            out.push_str(&format!(
                "{}\t{:.2}\t{}\t{}\t{}\t{:.4}\t{:.4}\t{:+.2}\t{:.4}\t{}\n",
                cat,
                m.rmse,
                m.nde,
                m.neea,
                m.est_acc,
                m.energy_share_est,
                m.energy_share_true,
                m.ese_points,
                m.events.acc,
                m.events.f,
            ));
        }
        out.push_str(&format!("overall\t\t\t\t{}\t\t\t\t\t\n", self.overall_est_acc));
        out
    }
}
