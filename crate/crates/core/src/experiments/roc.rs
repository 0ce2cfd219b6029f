use serde::{Deserialize, Serialize};

use super::bound::BoundTable;
use super::energy::{linear_to_db, p1_from_budget};
use super::trials::{collect_scored_trials, TrialSettings};
use crate::error::{Error, Result};
use crate::metrics::{quantile_thresholds, roc_sweep, RocPoint};
use crate::model::SystemConfig;
use crate::recovery::{Algorithm, RecoveryParams};

/// Quantile levels used for ROC thresholds unless overridden.
pub const DEFAULT_THRESHOLD_LEVELS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub ka: usize,
    pub ebn0_db: f64,
    pub p1_linear: f64,
    pub p1_dbw: f64,
    pub params: RecoveryParams,
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    /// Smallest false-alarm rate among points with `pd >= pd_min`.
    pub fn best_pf_at(&self, pd_min: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.pd >= pd_min)
            .map(|p| p.pf)
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// Sparsity-agnostic ROC for one user count.
///
/// `P1` follows the energy budget of the bound at `alpha`; the decoder
/// accumulates up to `ceil(1.5 * ka_design)` candidates or until the residual
/// reaches the noise floor, and the curve is traced by thresholding the
/// stored least-squares amplitudes.
#[allow(clippy::too_many_arguments)]
pub fn run_roc_experiment(
    config: &SystemConfig,
    algorithm: Algorithm,
    gomp_l: usize,
    bound: &BoundTable,
    alpha: f64,
    ka_design: usize,
    threshold_levels: usize,
    settings: &TrialSettings,
) -> Result<RocCurve> {
    if !matches!(algorithm, Algorithm::Omp | Algorithm::Gomp) {
        return Err(Error::Contract(format!(
            "ROC runs use omp or gomp, not {algorithm}"
        )));
    }
    let ebn0_db = bound.ebn0_db(config.ka)?;
    let p1 = p1_from_budget(ebn0_db, config.np, alpha, config.b, 0.0)?;
    let params = RecoveryParams::thresholded(algorithm, ka_design.max(config.ka), config.np, gomp_l);
    let trials = collect_scored_trials(config, p1, &params, settings)?;
    let thresholds = quantile_thresholds(&trials, threshold_levels);
    let points = roc_sweep(&trials, &thresholds)?;
    Ok(RocCurve {
        ka: config.ka,
        ebn0_db,
        p1_linear: p1,
        p1_dbw: linear_to_db(p1),
        params,
        points,
    })
}
