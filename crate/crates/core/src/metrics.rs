//! Detection and false-alarm statistics pooled over Monte Carlo trials, and
//! ROC assembly from stored decoder amplitudes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recovery::RecoveryOutput;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Per-trial confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_support_size: usize,
    pub candidate_space: usize,
}

impl TrialOutcome {
    /// Compares an estimate with the true support. Both are treated as sets.
    pub fn compare(truth: &[usize], estimate: &[usize], candidate_space: usize) -> Self {
        let mut t = truth.to_vec();
        t.sort_unstable();
        t.dedup();
        let mut e = estimate.to_vec();
        e.sort_unstable();
        e.dedup();
        let hits = e.iter().filter(|j| t.binary_search(j).is_ok()).count();
        TrialOutcome {
            true_positives: hits,
            false_positives: e.len() - hits,
            true_support_size: t.len(),
            candidate_space,
        }
    }

    pub fn misses(&self) -> usize {
        self.true_support_size - self.true_positives
    }
}

/// Point estimate of a proportion with its 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub estimate: f64,
    pub successes: u64,
    pub population: u64,
    pub lower: f64,
    pub upper: f64,
}

impl RateEstimate {
    pub fn from_counts(successes: u64, population: u64) -> Result<Self> {
        if population == 0 {
            return Err(Error::UndefinedStatistic("proportion over an empty population".into()));
        }
        if successes > population {
            return Err(Error::Contract(format!(
                "{successes} successes exceed population {population}"
            )));
        }
        let (lower, upper) = wilson_interval(successes, population, Z_95);
        Ok(RateEstimate {
            estimate: successes as f64 / population as f64,
            successes,
            population,
            lower,
            upper,
        })
    }

    /// Larger distance from the point estimate to an interval end.
    pub fn half_width(&self) -> f64 {
        (self.upper - self.estimate).max(self.estimate - self.lower)
    }
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let spread = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lower = if k == 0 { 0.0 } else { (centre - spread).max(0.0) };
    let upper = if k == n { 1.0 } else { (centre + spread).min(1.0) };
    (lower, upper)
}

/// Per-message detection probability pooled over trials.
pub fn detection_rate(outcomes: &[TrialOutcome]) -> Result<RateEstimate> {
    if outcomes.is_empty() {
        return Err(Error::UndefinedStatistic("detection rate of zero trials".into()));
    }
    let hits: u64 = outcomes.iter().map(|o| o.true_positives as u64).sum();
    let total: u64 = outcomes.iter().map(|o| o.true_support_size as u64).sum();
    RateEstimate::from_counts(hits, total)
}

/// Per-inactive-column false-alarm probability pooled over trials; the
/// inactive population of a trial is `2^bp - Ka`.
pub fn false_alarm_rate(outcomes: &[TrialOutcome]) -> Result<RateEstimate> {
    if outcomes.is_empty() {
        return Err(Error::UndefinedStatistic("false-alarm rate of zero trials".into()));
    }
    let alarms: u64 = outcomes.iter().map(|o| o.false_positives as u64).sum();
    let inactive: u64 = outcomes
        .iter()
        .map(|o| o.candidate_space.saturating_sub(o.true_support_size) as u64)
        .sum();
    RateEstimate::from_counts(alarms, inactive)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    #[serde(with = "threshold_repr")]
    pub threshold: f64,
    pub pd: f64,
    pub pf: f64,
    pub trials: usize,
    pub pd_ci: f64,
    pub pf_ci: f64,
}

/// JSON has no infinity; the unbounded threshold is written as `"inf"`.
mod threshold_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("invalid threshold `{t}`"))),
        }
    }
}

/// A decoded trial together with what was actually sent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTrial {
    pub truth: Vec<usize>,
    pub output: RecoveryOutput,
    pub candidate_space: usize,
}

/// Re-declares every trial at each threshold from its stored amplitudes
/// (`|amplitude| > threshold`) and pools `(pd, pf)` per threshold.
///
/// `thresholds` must be sorted in descending order.
pub fn roc_sweep(trials: &[ScoredTrial], thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    if trials.is_empty() {
        return Err(Error::UndefinedStatistic("ROC over zero trials".into()));
    }
    if thresholds.windows(2).any(|w| !(w[0] >= w[1])) || thresholds.iter().any(|t| t.is_nan()) {
        return Err(Error::Contract("ROC thresholds must be sorted in descending order".into()));
    }
    if let Some(bad) = trials
        .iter()
        .position(|t| t.output.amplitudes.len() != t.output.ranked_candidates.len())
    {
        return Err(Error::Contract(format!(
            "trial {bad} has ranked candidates without matching amplitudes"
        )));
    }

    // Per trial: |amplitude| of every candidate and whether it is a true one,
    // sorted by decreasing magnitude, so each threshold is a prefix.
    let scored: Vec<Vec<(f64, bool)>> = trials
        .iter()
        .map(|t| {
            let mut truth = t.truth.clone();
            truth.sort_unstable();
            let mut v: Vec<(f64, bool)> = t
                .output
                .amplitudes
                .iter()
                .map(|&(j, a)| (a.abs(), truth.binary_search(&j).is_ok()))
                .collect();
            v.sort_by(|a, b| b.0.total_cmp(&a.0));
            v
        })
        .collect();

    let mut cursors = vec![0usize; trials.len()];
    let mut outcomes: Vec<TrialOutcome> = trials
        .iter()
        .map(|t| TrialOutcome::compare(&t.truth, &[], t.candidate_space))
        .collect();

    let mut points = Vec::with_capacity(thresholds.len());
    for &th in thresholds {
        for ((cursor, cand), outcome) in cursors.iter_mut().zip(&scored).zip(outcomes.iter_mut()) {
            while *cursor < cand.len() && cand[*cursor].0 > th {
                if cand[*cursor].1 {
                    outcome.true_positives += 1;
                } else {
                    outcome.false_positives += 1;
                }
                *cursor += 1;
            }
        }
        let pd = detection_rate(&outcomes)?;
        let pf = false_alarm_rate(&outcomes)?;
        points.push(RocPoint {
            threshold: th,
            pd: pd.estimate,
            pf: pf.estimate,
            trials: trials.len(),
            pd_ci: pd.half_width(),
            pf_ci: pf.half_width(),
        });
    }
    Ok(points)
}

/// Descending threshold grid: `+inf`, `levels` quantiles of the pooled
/// `|amplitude|` values, then 0. Duplicates are removed.
pub fn quantile_thresholds(trials: &[ScoredTrial], levels: usize) -> Vec<f64> {
    let mut mags: Vec<f64> = trials
        .iter()
        .flat_map(|t| t.output.amplitudes.iter().map(|&(_, a)| a.abs()))
        .filter(|a| a.is_finite())
        .collect();
    mags.sort_by(|a, b| a.total_cmp(b));
    let mut th = vec![f64::INFINITY];
    if !mags.is_empty() && levels > 0 {
        for q in (1..=levels).rev() {
            let pos = ((q as f64 / (levels + 1) as f64) * (mags.len() - 1) as f64).round() as usize;
            th.push(mags[pos]);
        }
    }
    th.push(0.0);
    th.dedup();
    th
}

/// True when both coordinates are non-decreasing along the curve.
pub fn is_monotone(points: &[RocPoint]) -> bool {
    points.windows(2).all(|w| w[1].pd >= w[0].pd && w[1].pf >= w[0].pf)
}
