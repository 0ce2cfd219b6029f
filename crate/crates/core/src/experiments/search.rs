//! Minimum-power bisection and minimum-channel-use scans.

use serde::{Deserialize, Serialize};

use super::bound::BoundTable;
use super::energy::{db_to_linear, linear_to_db, p1_from_budget};
use super::trials::{estimate_pd_with_target, PdEstimate, TrialSettings};
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::recovery::RecoveryParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub p1_dbw: f64,
    pub pd: PdEstimate,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchOutcome {
    /// `min_p1_dbw` is the upper end of the final bracket; it met the target.
    Found { min_p1_dbw: f64, pd_at_min: PdEstimate },
    NotBracketed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinPowerResult {
    pub outcome: SearchOutcome,
    /// Every evaluated point, in evaluation order.
    pub steps: Vec<SearchStep>,
    pub bisection_steps: usize,
}

impl MinPowerResult {
    pub fn min_p1_dbw(&self) -> Option<f64> {
        match self.outcome {
            SearchOutcome::Found { min_p1_dbw, .. } => Some(min_p1_dbw),
            SearchOutcome::NotBracketed { .. } => None,
        }
    }

    pub fn pd_at_min(&self) -> Option<PdEstimate> {
        match self.outcome {
            SearchOutcome::Found { pd_at_min, .. } => Some(pd_at_min),
            SearchOutcome::NotBracketed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSearchSpec {
    pub low_dbw: f64,
    pub high_dbw: f64,
    pub target_pd: f64,
    pub tolerance_db: f64,
    /// How many times the bracket may be shifted by its own width when an
    /// endpoint does not bracket the target.
    pub max_widenings: usize,
}

impl PowerSearchSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.low_dbw.is_finite() && self.high_dbw.is_finite() && self.low_dbw < self.high_dbw) {
            return Err(Error::param("p1_bracket_db", "need finite low < high"));
        }
        if !(self.target_pd > 0.0 && self.target_pd <= 1.0) {
            return Err(Error::param("target_pd", "must lie in (0, 1]"));
        }
        if !(self.tolerance_db > 0.0) {
            return Err(Error::param("tolerance_db", "must be positive"));
        }
        Ok(())
    }
}

/// Bisection on `P1` (dB) for the smallest power whose estimated `pd` reaches
/// the target. Assumes `pd` is non-decreasing in `P1`; the bracket ends are
/// verified before bisecting. The certified result is the bracket's upper end.
pub fn min_power_search(
    config: &SystemConfig,
    params: &RecoveryParams,
    spec: &PowerSearchSpec,
    settings: &TrialSettings,
) -> Result<MinPowerResult> {
    spec.validate()?;
    let mut steps: Vec<SearchStep> = Vec::new();
    let mut eval = |p1_dbw: f64| -> Result<SearchStep> {
        if let Some(s) = steps.iter().find(|s| s.p1_dbw == p1_dbw) {
            return Ok(*s);
        }
        let pd = estimate_pd_with_target(config, db_to_linear(p1_dbw), params, settings, Some(spec.target_pd))?;
        let step = SearchStep {
            p1_dbw,
            pd,
            passed: pd.meets(spec.target_pd),
        };
        steps.push(step);
        Ok(step)
    };

    let width = spec.high_dbw - spec.low_dbw;
    let (mut low, mut high) = (spec.low_dbw, spec.high_dbw);

    let mut hi_step = eval(high)?;
    let mut widenings = 0;
    while !hi_step.passed {
        if widenings == spec.max_widenings {
            let reason = format!(
                "pd = {:.6} < {} at the top of the bracket ({high:.3} dBW) after {widenings} widenings",
                hi_step.pd.rate.estimate, spec.target_pd
            );
            return Ok(MinPowerResult {
                outcome: SearchOutcome::NotBracketed { reason },
                steps,
                bisection_steps: 0,
            });
        }
        low = high;
        high += width;
        widenings += 1;
        hi_step = eval(high)?;
    }

    let mut lo_step = eval(low)?;
    widenings = 0;
    while lo_step.passed {
        if widenings == spec.max_widenings {
            let reason = format!(
                "pd = {:.6} >= {} already at the bottom of the bracket ({low:.3} dBW) after {widenings} widenings",
                lo_step.pd.rate.estimate, spec.target_pd
            );
            return Ok(MinPowerResult {
                outcome: SearchOutcome::NotBracketed { reason },
                steps,
                bisection_steps: 0,
            });
        }
        high = low;
        hi_step = lo_step;
        low -= width;
        widenings += 1;
        lo_step = eval(low)?;
    }

    let mut bisection_steps = 0;
    while high - low > spec.tolerance_db {
        let mid = 0.5 * (low + high);
        let s = eval(mid)?;
        bisection_steps += 1;
        if s.passed {
            high = mid;
            hi_step = s;
        } else {
            low = mid;
        }
    }

    Ok(MinPowerResult {
        outcome: SearchOutcome::Found {
            min_p1_dbw: high,
            pd_at_min: hi_step.pd,
        },
        steps,
        bisection_steps,
    })
}

/// Pairs of fully-evaluated steps at least `min_gap_db` apart where the
/// higher power shows a lower `pd` than the lower one, beyond the sum of the
/// two confidence half-widths.
pub fn monotonicity_violations(steps: &[SearchStep], min_gap_db: f64) -> Vec<(f64, f64)> {
    let full: Vec<&SearchStep> = steps.iter().filter(|s| !s.pd.stopped_early).collect();
    let mut out = Vec::new();
    for a in &full {
        for b in &full {
            if b.p1_dbw >= a.p1_dbw + min_gap_db {
                let margin = a.pd.rate.half_width() + b.pd.rate.half_width();
                if b.pd.rate.estimate < a.pd.rate.estimate - margin {
                    out.push((a.p1_dbw, b.p1_dbw));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NpScanRow {
    pub np: usize,
    pub p1_linear: f64,
    pub p1_dbw: f64,
    /// `None` when the grid point cannot host the decoder (too few rows).
    pub pd: Option<PdEstimate>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinNpResult {
    pub min_np: Option<usize>,
    pub pd_at_min: Option<PdEstimate>,
    pub scan: Vec<NpScanRow>,
}

/// Default channel-use grid for the minimum-`Np` study.
pub const DEFAULT_NP_GRID: [usize; 10] = [250, 500, 750, 1000, 1250, 1500, 1750, 2000, 2500, 3000];

/// Smallest grid `Np` reaching `target_pd` when the power follows the energy
/// budget: `P1 = p1_from_budget(bound(Ka), Np, alpha, b, 0)`.
///
/// The scan walks the grid upwards and stops at the first qualifying `Np`
/// unless `full_scan` is set.
#[allow(clippy::too_many_arguments)]
pub fn min_np_search(
    config: &SystemConfig,
    params: &RecoveryParams,
    bound: &BoundTable,
    alpha: f64,
    target_pd: f64,
    np_grid: &[usize],
    settings: &TrialSettings,
    full_scan: bool,
) -> Result<MinNpResult> {
    if np_grid.is_empty() || np_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("np_grid", "must be non-empty and strictly ascending"));
    }
    if !(target_pd > 0.0 && target_pd <= 1.0) {
        return Err(Error::param("target_pd", "must lie in (0, 1]"));
    }
    let ebn0_db = bound.ebn0_db(config.ka)?;
    let needed_rows = params.algorithm.min_rows(params.k_input, params.gomp_l);

    let mut scan = Vec::new();
    let mut found: Option<(usize, PdEstimate)> = None;
    for &np in np_grid {
        let p1 = p1_from_budget(ebn0_db, np, alpha, config.b, 0.0)?;
        let cfg = match config.with_np(np) {
            Ok(c) if np >= needed_rows => c,
            _ => {
                scan.push(NpScanRow {
                    np,
                    p1_linear: p1,
                    p1_dbw: linear_to_db(p1),
                    pd: None,
                    passed: false,
                });
                continue;
            }
        };
        let target = if full_scan { None } else { Some(target_pd) };
        let pd = estimate_pd_with_target(&cfg, p1, params, settings, target)?;
        let passed = pd.meets(target_pd);
        scan.push(NpScanRow {
            np,
            p1_linear: p1,
            p1_dbw: linear_to_db(p1),
            pd: Some(pd),
            passed,
        });
        if passed && found.is_none() {
            found = Some((np, pd));
            if !full_scan {
                break;
            }
        }
    }
    Ok(MinNpResult {
        min_np: found.map(|f| f.0),
        pd_at_min: found.map(|f| f.1),
        scan,
    })
}
