//! Monte Carlo experiments: minimum power, minimum pilot length and ROC.
//!
//! Every experiment is described by an [`ExperimentRequest`], which is
//! serializable and fully determines the results. An [`ExperimentReport`]
//! embeds its request, so [`ExperimentReport::replay`] reruns it exactly.

pub mod bound;
pub mod energy;
pub mod roc;
pub mod search;
pub mod trials;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use bound::{load_bound_table, BoundTable};
pub use energy::{db_to_linear, eb_n0, linear_to_db, p1_from_budget, reference_power_line, EnergyConfig, ReferenceLines};
pub use roc::{run_roc_experiment, RocCurve, DEFAULT_THRESHOLD_LEVELS};
pub use search::{
    min_np_search, min_power_search, MinNpResult, MinPowerResult, NpScanRow, PowerSearchSpec, SearchOutcome,
    SearchStep, DEFAULT_NP_GRID,
};
pub use trials::{estimate_pd, estimate_pd_with_target, single_run, PdEstimate, SingleRun, TrialSettings};

use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::recovery::{Algorithm, RecoveryParams, DEFAULT_GOMP_L};

pub const DEFAULT_TARGET_PD: f64 = 0.999;
pub const DEFAULT_SEED: u64 = 2024;

/// Trial budgets. `Desk` is sized for a workstation; `Full` matches the
/// statistical resolution of the published curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Desk,
    #[value(alias = "paper")]
    Full,
}

impl Profile {
    pub fn search_trials(self) -> usize {
        match self {
            Profile::Desk => 2_000,
            Profile::Full => 10_000,
        }
    }

    pub fn roc_trials(self) -> usize {
        match self {
            Profile::Desk => 1_000,
            Profile::Full => 10_000,
        }
    }

    pub fn tolerance_db(self) -> f64 {
        match self {
            Profile::Desk => 0.5,
            Profile::Full => 0.1,
        }
    }
}

/// A decoder configuration evaluated by the search experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoderVariant {
    pub algorithm: Algorithm,
    /// Fractional over-estimate of `Ka` given to the decoder.
    pub excess: f64,
    pub gomp_l: usize,
}

impl DecoderVariant {
    pub fn new(algorithm: Algorithm, excess: f64) -> Self {
        DecoderVariant {
            algorithm,
            excess,
            gomp_l: DEFAULT_GOMP_L,
        }
    }

    pub fn params(&self, ka: usize) -> Result<RecoveryParams> {
        let p = RecoveryParams::known_sparsity(self.algorithm, ka, self.excess, self.gomp_l);
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinPowerRequest {
    pub system: SystemConfig,
    pub kas: Vec<usize>,
    pub variants: Vec<DecoderVariant>,
    pub search: PowerSearchSpec,
    pub settings: TrialSettings,
    /// When present, reference power lines are reported next to each result.
    pub bound: Option<BoundTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinNpRequest {
    pub system: SystemConfig,
    pub kas: Vec<usize>,
    pub variants: Vec<DecoderVariant>,
    pub bound: BoundTable,
    pub alpha: f64,
    pub target_pd: f64,
    pub np_grid: Vec<usize>,
    pub settings: TrialSettings,
    pub full_scan: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocRequest {
    pub system: SystemConfig,
    pub kas: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub gomp_l: usize,
    pub bound: BoundTable,
    pub alpha: f64,
    /// Design user count for the iteration cap; the largest `Ka` if absent.
    pub ka_design: Option<usize>,
    pub threshold_levels: usize,
    pub settings: TrialSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentRequest {
    MinPower(MinPowerRequest),
    MinNp(MinNpRequest),
    Roc(RocRequest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinPowerRow {
    pub ka: usize,
    pub variant: DecoderVariant,
    pub result: MinPowerResult,
    pub reference: Option<ReferenceLines>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinNpRow {
    pub ka: usize,
    pub variant: DecoderVariant,
    pub result: MinNpResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocRow {
    pub algorithm: Algorithm,
    pub curve: RocCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "rows", rename_all = "kebab-case")]
pub enum ExperimentResults {
    MinPower(Vec<MinPowerRow>),
    MinNp(Vec<MinNpRow>),
    Roc(Vec<RocRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub request: ExperimentRequest,
    pub results: ExperimentResults,
}

fn non_empty<T>(name: &'static str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(Error::param(name, "at least one value is required"))
    } else {
        Ok(())
    }
}

pub fn run_experiment(request: &ExperimentRequest) -> Result<ExperimentReport> {
    let results = match request {
        ExperimentRequest::MinPower(r) => ExperimentResults::MinPower(run_min_power(r)?),
        ExperimentRequest::MinNp(r) => ExperimentResults::MinNp(run_min_np(r)?),
        ExperimentRequest::Roc(r) => ExperimentResults::Roc(run_roc(r)?),
    };
    Ok(ExperimentReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        request: request.clone(),
        results,
    })
}

fn run_min_power(r: &MinPowerRequest) -> Result<Vec<MinPowerRow>> {
    non_empty("ka", &r.kas)?;
    non_empty("algorithm", &r.variants)?;
    let mut rows = Vec::new();
    for &ka in &r.kas {
        let cfg = r.system.with_ka(ka)?;
        let reference = match &r.bound {
            Some(b) if b.covers(ka) => Some(reference_power_line(b.ebn0_db(ka)?, cfg.np, cfg.b)?),
            _ => None,
        };
        for v in &r.variants {
            let params = v.params(ka)?;
            let result = min_power_search(&cfg, &params, &r.search, &r.settings)?;
            rows.push(MinPowerRow {
                ka,
                variant: *v,
                result,
                reference,
            });
        }
    }
    Ok(rows)
}

fn run_min_np(r: &MinNpRequest) -> Result<Vec<MinNpRow>> {
    non_empty("ka", &r.kas)?;
    non_empty("algorithm", &r.variants)?;
    let mut rows = Vec::new();
    for &ka in &r.kas {
        let cfg = r.system.with_ka(ka)?;
        for v in &r.variants {
            let params = v.params(ka)?;
            let result = min_np_search(&cfg, &params, &r.bound, r.alpha, r.target_pd, &r.np_grid, &r.settings, r.full_scan)?;
            rows.push(MinNpRow { ka, variant: *v, result });
        }
    }
    Ok(rows)
}

fn run_roc(r: &RocRequest) -> Result<Vec<RocRow>> {
    non_empty("ka", &r.kas)?;
    non_empty("algorithm", &r.algorithms)?;
    let ka_design = r.ka_design.unwrap_or_else(|| r.kas.iter().copied().max().unwrap_or(1));
    let mut rows = Vec::new();
    for &ka in &r.kas {
        let cfg = r.system.with_ka(ka)?;
        for &algorithm in &r.algorithms {
            let curve = run_roc_experiment(&cfg, algorithm, r.gomp_l, &r.bound, r.alpha, ka_design, r.threshold_levels, &r.settings)?;
            rows.push(RocRow { algorithm, curve });
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct MinPowerCsv {
    ka: usize,
    algorithm: Algorithm,
    excess: f64,
    min_p1_dbw: Option<f64>,
    pd_at_min: Option<f64>,
    trials: usize,
    seed: u64,
    gomp_l: usize,
    pd_ci: Option<f64>,
    trials_run: Option<usize>,
    status: &'static str,
    ref_alpha1_dbw: Option<f64>,
    ref_alpha1_backoff_dbw: Option<f64>,
    ref_alpha1p5_dbw: Option<f64>,
}

#[derive(Serialize)]
struct MinNpCsv {
    ka: usize,
    algorithm: Algorithm,
    min_np: Option<usize>,
    pd_at_min: Option<f64>,
    trials: usize,
    seed: u64,
    excess: f64,
    gomp_l: usize,
    pd_ci: Option<f64>,
}

#[derive(Serialize)]
struct RocCsv {
    ka: usize,
    algorithm: Algorithm,
    threshold: f64,
    pd: f64,
    pf: f64,
    pd_ci: f64,
    pf_ci: f64,
    trials: usize,
    seed: u64,
    p1_dbw: f64,
}

impl ExperimentReport {
    /// Reruns the embedded request. Results are identical to the original
    /// run regardless of the worker count.
    pub fn replay(&self) -> Result<ExperimentReport> {
        run_experiment(&self.request)
    }

    pub fn settings(&self) -> &TrialSettings {
        match &self.request {
            ExperimentRequest::MinPower(r) => &r.settings,
            ExperimentRequest::MinNp(r) => &r.settings,
            ExperimentRequest::Roc(r) => &r.settings,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let s = *self.settings();
        let mut w = csv::Writer::from_writer(out);
        match &self.results {
            ExperimentResults::MinPower(rows) => {
                for r in rows {
                    let pd = r.result.pd_at_min();
                    w.serialize(MinPowerCsv {
                        ka: r.ka,
                        algorithm: r.variant.algorithm,
                        excess: r.variant.excess,
                        min_p1_dbw: r.result.min_p1_dbw(),
                        pd_at_min: pd.map(|p| p.rate.estimate),
                        trials: s.trials,
                        seed: s.seed,
                        gomp_l: r.variant.gomp_l,
                        pd_ci: pd.map(|p| p.rate.half_width()),
                        trials_run: pd.map(|p| p.trials_run),
                        status: match r.result.outcome {
                            SearchOutcome::Found { .. } => "found",
                            SearchOutcome::NotBracketed { .. } => "not-bracketed",
                        },
                        ref_alpha1_dbw: r.reference.map(|x| x.alpha1_dbw),
                        ref_alpha1_backoff_dbw: r.reference.map(|x| x.alpha1_backoff_dbw),
                        ref_alpha1p5_dbw: r.reference.map(|x| x.alpha1p5_dbw),
                    })?;
                }
            }
            ExperimentResults::MinNp(rows) => {
                for r in rows {
                    let pd = r.result.pd_at_min;
                    w.serialize(MinNpCsv {
                        ka: r.ka,
                        algorithm: r.variant.algorithm,
                        min_np: r.result.min_np,
                        pd_at_min: pd.map(|p| p.rate.estimate),
                        trials: s.trials,
                        seed: s.seed,
                        excess: r.variant.excess,
                        gomp_l: r.variant.gomp_l,
                        pd_ci: pd.map(|p| p.rate.half_width()),
                    })?;
                }
            }
            ExperimentResults::Roc(rows) => {
                for r in rows {
                    for p in &r.curve.points {
                        w.serialize(RocCsv {
                            ka: r.curve.ka,
                            algorithm: r.algorithm,
                            threshold: p.threshold,
                            pd: p.pd,
                            pf: p.pf,
                            pd_ci: p.pd_ci,
                            pf_ci: p.pf_ci,
                            trials: p.trials,
                            seed: s.seed,
                            p1_dbw: r.curve.p1_dbw,
                        })?;
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_files(&self, csv_path: Option<&Path>, json_path: Option<&Path>) -> Result<()> {
        let io_err = |p: &Path| {
            let path = p.to_path_buf();
            move |source| Error::Io { path, source }
        };
        if let Some(p) = csv_path {
            let f = std::fs::File::create(p).map_err(io_err(p))?;
            self.write_csv(std::io::BufWriter::new(f))?;
        }
        if let Some(p) = json_path {
            std::fs::write(p, self.to_json()?).map_err(io_err(p))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_roc() -> ExperimentRequest {
        ExperimentRequest::Roc(RocRequest {
            system: SystemConfig::new(100, 9, 30_000, 200, 4).unwrap(),
            kas: vec![3, 4],
            algorithms: vec![Algorithm::Omp],
            gomp_l: 2,
            bound: BoundTable::new(vec![(1, 3.0), (10, 3.0)]).unwrap(),
            alpha: 1.0,
            ka_design: None,
            threshold_levels: 20,
            settings: TrialSettings::new(20, 11),
        })
    }

    #[test]
    fn report_json_round_trip_and_replay() {
        let report = run_experiment(&small_roc()).unwrap();
        let back = ExperimentReport::from_json(&report.to_json().unwrap()).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.replay().unwrap(), report);
    }

    #[test]
    fn roc_csv_has_one_row_per_point() {
        let report = run_experiment(&small_roc()).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "ka,algorithm,threshold,pd,pf,pd_ci,pf_ci,trials,seed,p1_dbw"
        );
        let ExperimentResults::Roc(rows) = &report.results else { panic!() };
        let points: usize = rows.iter().map(|r| r.curve.points.len()).sum();
        assert_eq!(lines.count(), points);
        // The iteration cap follows the largest Ka in the request.
        assert!(rows.iter().all(|r| r.curve.params.max_iterations == 6));
    }

    #[test]
    fn profiles() {
        assert_eq!(Profile::Desk.search_trials(), 2_000);
        assert_eq!(Profile::Full.search_trials(), 10_000);
        assert!(Profile::Full.tolerance_db() <= 0.1);
    }
}
