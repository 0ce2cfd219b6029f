//! End-to-end Monte Carlo trials: sample users, transmit, add noise, decode.
//!
//! Trial `t` of a run with root seed `s` draws its supports from
//! `derive_seed(s, Supports, t)` and its noise from `derive_seed(s, Noise, t)`.
//! The sensing matrix comes from `derive_seed(s, Matrix, 0)`, or from
//! `derive_seed(s, Matrix, t)` when matrices are resampled per trial. Trials
//! run in parallel; results are reduced in trial order, so pooled statistics
//! do not depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{detection_rate, RateEstimate, ScoredTrial, TrialOutcome};
use crate::model::{
    add_noise_with_variance, build_sensing_matrix, sample_supports, transmit, SensingMatrix, SupportSet, SystemConfig,
};
use crate::recovery::{recover, recover_thresholded, RecoveryOutput, RecoveryParams};
use crate::rng::{derive_seed, Stream};

/// Trials evaluated between early-stop checks. Fixed so that the set of
/// trials run never depends on scheduling.
pub const TRIAL_BATCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSettings {
    pub trials: usize,
    pub seed: u64,
    pub allow_duplicates: bool,
    /// Skip the channel noise entirely.
    pub noiseless: bool,
    /// Draw a fresh sensing matrix for every trial instead of one per run.
    pub resample_matrix: bool,
    /// Worker threads; `None` uses the available parallelism.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl TrialSettings {
    pub fn new(trials: usize, seed: u64) -> Self {
        TrialSettings {
            trials,
            seed,
            allow_duplicates: false,
            noiseless: false,
            resample_matrix: false,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::param("workers", "must be at least 1"));
        }
        Ok(())
    }

    pub fn matrix_seed(&self, trial: usize) -> u64 {
        let idx = if self.resample_matrix { trial as u64 } else { 0 };
        derive_seed(self.seed, Stream::Matrix, idx)
    }

    pub fn support_seed(&self, trial: usize) -> u64 {
        derive_seed(self.seed, Stream::Supports, trial as u64)
    }

    pub fn noise_seed(&self, trial: usize) -> u64 {
        derive_seed(self.seed, Stream::Noise, trial as u64)
    }
}

/// Runs `f` inside a pool of the requested size.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::param("workers", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// One realization of the channel.
#[derive(Debug, Clone)]
pub struct Realization {
    pub supports: SupportSet,
    pub samples: crate::model::ReceivedSignal,
}

pub fn realize(
    config: &SystemConfig,
    matrix: &SensingMatrix,
    settings: &TrialSettings,
    trial: usize,
) -> Result<Realization> {
    let supports = sample_supports(config.ka, config.bp, settings.support_seed(trial), settings.allow_duplicates)?;
    let clean = transmit(matrix, &supports)?;
    let variance = if settings.noiseless { 0.0 } else { config.noise_power };
    let samples = add_noise_with_variance(&clean, variance, settings.noise_seed(trial));
    Ok(Realization { supports, samples })
}

/// Shared sensing matrix for a run, or `None` when resampled per trial.
fn run_matrix(config: &SystemConfig, p1: f64, settings: &TrialSettings) -> Result<Option<SensingMatrix>> {
    if settings.resample_matrix {
        Ok(None)
    } else {
        build_sensing_matrix(config.bp, config.np, p1, settings.matrix_seed(0)).map(Some)
    }
}

fn trial_matrix<'a>(
    shared: &'a Option<SensingMatrix>,
    owned: &'a mut Option<SensingMatrix>,
    config: &SystemConfig,
    p1: f64,
    settings: &TrialSettings,
    trial: usize,
) -> Result<&'a SensingMatrix> {
    match shared {
        Some(m) => Ok(m),
        None => {
            *owned = Some(build_sensing_matrix(config.bp, config.np, p1, settings.matrix_seed(trial))?);
            Ok(owned.as_ref().expect("just built"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdEstimate {
    pub rate: RateEstimate,
    pub trials_requested: usize,
    pub trials_run: usize,
    /// True when the run was cut short because the target had become
    /// unreachable; `rate` then covers only the trials run.
    pub stopped_early: bool,
    pub rank_deficient_trials: usize,
}

impl PdEstimate {
    pub fn meets(&self, target: f64) -> bool {
        !self.stopped_early && self.rate.estimate >= target
    }
}

/// Pooled per-message detection probability over `settings.trials` trials.
pub fn estimate_pd(
    config: &SystemConfig,
    p1: f64,
    params: &RecoveryParams,
    settings: &TrialSettings,
) -> Result<PdEstimate> {
    estimate_pd_with_target(config, p1, params, settings, None)
}

/// As [`estimate_pd`], but with `Some(target)` stops after the first batch
/// at which `pd >= target` can no longer be reached by the full run.
pub fn estimate_pd_with_target(
    config: &SystemConfig,
    p1: f64,
    params: &RecoveryParams,
    settings: &TrialSettings,
    target: Option<f64>,
) -> Result<PdEstimate> {
    config.validate()?;
    settings.validate()?;
    params.validate()?;
    let shared = run_matrix(config, p1, settings)?;

    let run_one = |t: usize| -> Result<(TrialOutcome, bool)> {
        let mut owned = None;
        let matrix = trial_matrix(&shared, &mut owned, config, p1, settings, t)?;
        let real = realize(config, matrix, settings, t)?;
        let out = recover(&real.samples, matrix, params)?;
        Ok((
            TrialOutcome::compare(real.supports.indices(), &out.support_estimate, matrix.num_columns()),
            out.rank_deficient,
        ))
    };

    // Misses allowed over the whole run; `trials * ka` bounds the number of
    // distinct messages from above even with duplicates enabled.
    let max_messages = (settings.trials * config.ka) as f64;
    let miss_budget = target.map(|p| (1.0 - p) * max_messages);

    let (outcomes, deficient, stopped) = with_workers(settings.workers, || -> Result<_> {
        let mut outcomes: Vec<TrialOutcome> = Vec::with_capacity(settings.trials);
        let mut deficient = 0usize;
        let mut misses = 0usize;
        let mut start = 0;
        while start < settings.trials {
            let end = (start + TRIAL_BATCH).min(settings.trials);
            let batch: Vec<(TrialOutcome, bool)> = (start..end).into_par_iter().map(run_one).collect::<Result<_>>()?;
            for (o, d) in batch {
                misses += o.misses();
                deficient += usize::from(d);
                outcomes.push(o);
            }
            start = end;
            if let Some(budget) = miss_budget {
                if misses as f64 > budget && start < settings.trials {
                    return Ok((outcomes, deficient, true));
                }
            }
        }
        Ok((outcomes, deficient, false))
    })??;

    Ok(PdEstimate {
        rate: detection_rate(&outcomes)?,
        trials_requested: settings.trials,
        trials_run: outcomes.len(),
        stopped_early: stopped,
        rank_deficient_trials: deficient,
    })
}

/// Runs thresholded decoding (threshold 0, so every candidate and its
/// amplitude is kept) over all trials, for ROC assembly.
pub fn collect_scored_trials(
    config: &SystemConfig,
    p1: f64,
    params: &RecoveryParams,
    settings: &TrialSettings,
) -> Result<Vec<ScoredTrial>> {
    config.validate()?;
    settings.validate()?;
    let shared = run_matrix(config, p1, settings)?;
    let run_one = |t: usize| -> Result<ScoredTrial> {
        let mut owned = None;
        let matrix = trial_matrix(&shared, &mut owned, config, p1, settings, t)?;
        let real = realize(config, matrix, settings, t)?;
        let mut output = recover_thresholded(&real.samples, matrix, params, 0.0)?;
        output.trace.clear();
        Ok(ScoredTrial {
            truth: real.supports.distinct(),
            output,
            candidate_space: matrix.num_columns(),
        })
    };
    with_workers(settings.workers, || (0..settings.trials).into_par_iter().map(run_one).collect())?
}

/// Full record of one decoded trial, for single-run inspection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleRun {
    pub matrix_seed: u64,
    pub support_seed: u64,
    pub noise_seed: u64,
    pub p1: f64,
    pub truth: Vec<usize>,
    pub output: RecoveryOutput,
    pub outcome: TrialOutcome,
    pub misses: Vec<usize>,
    pub false_alarms: Vec<usize>,
    pub received_norm: f64,
}

pub fn single_run(config: &SystemConfig, p1: f64, params: &RecoveryParams, settings: &TrialSettings) -> Result<SingleRun> {
    config.validate()?;
    params.validate()?;
    let matrix = build_sensing_matrix(config.bp, config.np, p1, settings.matrix_seed(0))?;
    let real = realize(config, &matrix, settings, 0)?;
    let output = recover(&real.samples, &matrix, params)?;
    let truth = real.supports.distinct();
    let misses = truth
        .iter()
        .copied()
        .filter(|j| output.support_estimate.binary_search(j).is_err())
        .collect();
    let false_alarms = output
        .support_estimate
        .iter()
        .copied()
        .filter(|j| truth.binary_search(j).is_err())
        .collect();
    Ok(SingleRun {
        matrix_seed: settings.matrix_seed(0),
        support_seed: settings.support_seed(0),
        noise_seed: settings.noise_seed(0),
        p1,
        outcome: TrialOutcome::compare(&truth, &output.support_estimate, matrix.num_columns()),
        received_norm: real.samples.norm(),
        truth,
        output,
        misses,
        false_alarms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::energy::db_to_linear;
    use crate::recovery::Algorithm;

    #[test]
    fn noiseless_small_ka_is_perfect() {
        let cfg = SystemConfig::new(100, 12, 30_000, 400, 2).unwrap();
        let params = RecoveryParams::known_sparsity(Algorithm::Omp, 2, 0.0, 2);
        let mut s = TrialSettings::new(100, 5);
        s.noiseless = true;
        let pd = estimate_pd(&cfg, 0.05, &params, &s).unwrap();
        assert_eq!(pd.rate.estimate, 1.0);
        assert_eq!(pd.trials_run, 100);
    }

    #[test]
    fn vanishing_power_is_chance_level() {
        let cfg = SystemConfig::new(100, 12, 30_000, 400, 4).unwrap();
        let params = RecoveryParams::known_sparsity(Algorithm::Omp, 4, 0.0, 2);
        let s = TrialSettings::new(200, 9);
        let pd = estimate_pd(&cfg, db_to_linear(-60.0), &params, &s).unwrap();
        // chance: 4 guesses among 4096 columns
        let chance = 4.0 / 4096.0;
        assert!(pd.rate.lower <= chance + 1e-12, "{:?}", pd.rate);
        assert!(pd.rate.estimate < 0.01);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = SystemConfig::new(100, 10, 30_000, 120, 8).unwrap();
        let params = RecoveryParams::known_sparsity(Algorithm::Gomp, 8, 0.0, 2);
        let mut s = TrialSettings::new(120, 3);
        s.workers = Some(1);
        let a = estimate_pd(&cfg, 0.02, &params, &s).unwrap();
        s.workers = Some(3);
        let b = estimate_pd(&cfg, 0.02, &params, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn early_stop_only_when_target_unreachable() {
        let cfg = SystemConfig::new(100, 12, 30_000, 300, 10).unwrap();
        let params = RecoveryParams::known_sparsity(Algorithm::Omp, 10, 0.0, 2);
        let s = TrialSettings::new(400, 1);
        let low = estimate_pd_with_target(&cfg, db_to_linear(-25.0), &params, &s, Some(0.999)).unwrap();
        assert!(low.stopped_early);
        assert!(low.trials_run < 400);
        assert!(!low.meets(0.999));
        let full = estimate_pd(&cfg, db_to_linear(-25.0), &params, &s).unwrap();
        assert!(full.rate.estimate < 0.999);
    }

    #[test]
    fn single_run_reports_trace() {
        let cfg = SystemConfig::new(100, 10, 30_000, 200, 2).unwrap();
        let params = RecoveryParams::known_sparsity(Algorithm::Omp, 2, 0.0, 2);
        let mut s = TrialSettings::new(1, 1);
        s.noiseless = true;
        let run = single_run(&cfg, 0.05, &params, &s).unwrap();
        assert!(run.misses.is_empty());
        assert_eq!(run.output.trace.len(), 2);
        assert_eq!(run.truth, run.output.support_estimate);
    }

    #[test]
    fn resampled_matrices_differ_per_trial() {
        let mut s = TrialSettings::new(3, 4);
        assert_eq!(s.matrix_seed(0), s.matrix_seed(2));
        s.resample_matrix = true;
        assert_ne!(s.matrix_seed(0), s.matrix_seed(2));
        let cfg = SystemConfig::new(100, 8, 30_000, 64, 3).unwrap();
        let params = RecoveryParams::known_sparsity(Algorithm::Sp, 3, 0.0, 2);
        assert!(estimate_pd(&cfg, 0.5, &params, &s).is_ok());
    }
}
