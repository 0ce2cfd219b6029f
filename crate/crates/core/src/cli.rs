//! Command-line front end.
//!
//! Values are resolved in the order command-line flag, then `--config` JSON
//! file, then the built-in defaults of [`RunConfig::default`].

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{
    db_to_linear, load_bound_table, run_experiment, single_run, DecoderVariant, ExperimentReport,
    ExperimentRequest, ExperimentResults, MinNpRequest, MinPowerRequest, PowerSearchSpec, Profile, RocRequest,
    SearchOutcome, TrialSettings, DEFAULT_NP_GRID, DEFAULT_SEED, DEFAULT_TARGET_PD, DEFAULT_THRESHOLD_LEVELS,
};
use crate::model::SystemConfig;
use crate::recovery::{Algorithm, RecoveryParams, DEFAULT_GOMP_L};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SEARCH: i32 = 3;

/// Every tunable of a run. Deserialized from `--config` with missing fields
/// taking their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub b: u32,
    pub bp: u32,
    pub nt: usize,
    pub np: usize,
    pub ka: Vec<usize>,
    pub algorithm: Vec<Algorithm>,
    pub excess: f64,
    pub gomp_l: usize,
    pub alpha: f64,
    pub target_pd: f64,
    pub profile: Profile,
    /// Overrides the profile's trial count.
    pub trials: Option<usize>,
    /// Overrides the profile's bisection tolerance.
    pub tolerance_db: Option<f64>,
    pub seed: u64,
    pub p1_dbw: f64,
    pub p1_low_dbw: f64,
    pub p1_high_dbw: f64,
    pub max_widenings: usize,
    pub np_grid: Vec<usize>,
    pub full_scan: bool,
    pub threshold_levels: usize,
    pub ka_design: Option<usize>,
    pub noiseless: bool,
    pub allow_duplicates: bool,
    pub resample_matrix: bool,
    pub workers: Option<usize>,
    pub bound_table: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            b: 100,
            bp: 15,
            nt: 30_000,
            np: 2_000,
            ka: vec![25],
            algorithm: vec![Algorithm::Omp],
            excess: 0.0,
            gomp_l: DEFAULT_GOMP_L,
            alpha: 1.0,
            target_pd: DEFAULT_TARGET_PD,
            profile: Profile::Desk,
            trials: None,
            tolerance_db: None,
            seed: DEFAULT_SEED,
            p1_dbw: -13.0,
            p1_low_dbw: -20.0,
            p1_high_dbw: -10.0,
            max_widenings: 4,
            np_grid: DEFAULT_NP_GRID.to_vec(),
            full_scan: false,
            threshold_levels: DEFAULT_THRESHOLD_LEVELS,
            ka_design: None,
            noiseless: false,
            allow_duplicates: false,
            resample_matrix: false,
            workers: None,
            bound_table: None,
            output: None,
            report: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "umacs", version, about = "Compressed-sensing phase of unsourced multiple access")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decode one trial and print its full trace.
    SingleRun(RunArgs),
    /// Minimum P1 reaching the target detection probability, per Ka and decoder.
    MinPower(RunArgs),
    /// Minimum Np reaching the target when P1 follows the bound's energy budget.
    MinNp(RunArgs),
    /// Detection versus false-alarm curves for sparsity-agnostic decoding.
    Roc(RunArgs),
    /// Re-run the request embedded in a JSON report and check the results match.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Report written by an earlier run.
    pub report: PathBuf,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Where to write the replayed table.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// JSON file with any subset of the run configuration fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Message length in bits.
    #[arg(long)]
    pub b: Option<u32>,
    /// Prefix bits encoded by the CS phase; the codebook has 2^bp columns.
    #[arg(long)]
    pub bp: Option<u32>,
    /// Total channel uses.
    #[arg(long)]
    pub nt: Option<usize>,
    /// Channel uses spent on the CS phase.
    #[arg(long)]
    pub np: Option<usize>,
    /// Active users; comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub ka: Option<Vec<usize>>,
    /// Decoders; comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub algorithm: Option<Vec<Algorithm>>,
    /// Known-sparsity decoders aim for ceil((1 + excess) * Ka) columns.
    #[arg(long)]
    pub excess: Option<f64>,
    /// Columns added per gOMP iteration.
    #[arg(long)]
    pub gomp_l: Option<usize>,
    /// Energy ratio between the CS phase and the rest of the transmission.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Detection probability a search must reach.
    #[arg(long)]
    pub target_pd: Option<f64>,
    /// Trial counts and tolerances; `paper` is an alias of `full`.
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    /// Monte Carlo trials per point; overrides the profile.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Bisection stops once the bracket is this narrow; overrides the profile.
    #[arg(long)]
    pub tolerance_db: Option<f64>,
    /// Root seed for every random stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// CS-phase power for `single-run`, in dBW.
    #[arg(long, allow_hyphen_values = true)]
    pub p1_dbw: Option<f64>,
    /// Lower end of the initial P1 bracket, in dBW.
    #[arg(long, allow_hyphen_values = true)]
    pub p1_low: Option<f64>,
    /// Upper end of the initial P1 bracket, in dBW.
    #[arg(long, allow_hyphen_values = true)]
    pub p1_high: Option<f64>,
    /// How many times a bracket that misses the crossing may be widened.
    #[arg(long)]
    pub max_widenings: Option<usize>,
    /// Np values scanned by `min-np`, ascending; comma-separated list.
    #[arg(long, value_delimiter = ',')]
    pub np_grid: Option<Vec<usize>>,
    /// Evaluate the whole Np grid instead of stopping at the first pass.
    #[arg(long)]
    pub full_scan: bool,
    /// Number of amplitude thresholds swept per ROC curve.
    #[arg(long)]
    pub threshold_levels: Option<usize>,
    /// Ka the iteration cap is sized for in sparsity-agnostic decoding.
    #[arg(long)]
    pub ka_design: Option<usize>,
    /// Drop the channel noise.
    #[arg(long)]
    pub noiseless: bool,
    /// Let users pick the same message.
    #[arg(long)]
    pub allow_duplicates: bool,
    /// Draw a fresh row selection for every trial.
    #[arg(long)]
    pub resample_matrix: bool,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub workers: Option<usize>,
    /// CSV with `ka,ebn0_db` reference rows.
    #[arg(long)]
    pub bound_table: Option<PathBuf>,
    /// Comma-separated table; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON report (or, for `single-run`, the trial record).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl RunArgs {
    /// Layers the flags over the config file (if any) over the defaults.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => serde_json::from_str(&read_file(p)?)
                .map_err(|e| Error::Parse { path: p.clone(), line: e.line(), reason: e.to_string() })?,
            None => RunConfig::default(),
        };
        macro_rules! overlay {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = &self.$flag { c.$field = v.clone().into(); })*
            };
        }
        overlay!(
            b => b, bp => bp, nt => nt, np => np, ka => ka, algorithm => algorithm,
            excess => excess, gomp_l => gomp_l, alpha => alpha, target_pd => target_pd,
            profile => profile, trials => trials, tolerance_db => tolerance_db, seed => seed,
            p1_dbw => p1_dbw, p1_low => p1_low_dbw, p1_high => p1_high_dbw,
            max_widenings => max_widenings, np_grid => np_grid,
            threshold_levels => threshold_levels, ka_design => ka_design, workers => workers,
            bound_table => bound_table, output => output, report => report,
        );
        c.full_scan |= self.full_scan;
        c.noiseless |= self.noiseless;
        c.allow_duplicates |= self.allow_duplicates;
        c.resample_matrix |= self.resample_matrix;
        Ok(c)
    }
}

impl RunConfig {
    pub fn system(&self) -> Result<SystemConfig> {
        let ka = *self.ka.first().ok_or_else(|| Error::param("ka", "at least one value is required"))?;
        SystemConfig::new(self.b, self.bp, self.nt, self.np, ka)
    }

    fn settings(&self, default_trials: usize) -> TrialSettings {
        TrialSettings {
            trials: self.trials.unwrap_or(default_trials),
            seed: self.seed,
            allow_duplicates: self.allow_duplicates,
            noiseless: self.noiseless,
            resample_matrix: self.resample_matrix,
            workers: self.workers,
        }
    }

    fn variants(&self) -> Vec<DecoderVariant> {
        self.algorithm
            .iter()
            .map(|&algorithm| DecoderVariant {
                algorithm,
                excess: self.excess,
                gomp_l: self.gomp_l,
            })
            .collect()
    }

    fn require_bound(&self, command: &str) -> Result<crate::experiments::BoundTable> {
        match &self.bound_table {
            Some(p) => load_bound_table(p),
            None => Err(Error::param(
                "bound_table",
                format!("`{command}` needs reference Eb/N0 values; pass --bound-table <FILE>"),
            )),
        }
    }

    /// Checks every Ka against the system limits before any trial runs.
    fn system_for_all(&self) -> Result<SystemConfig> {
        self.check_kas(self.system()?)
    }

    fn check_kas(&self, sys: SystemConfig) -> Result<SystemConfig> {
        for &ka in &self.ka {
            sys.with_ka(ka)?;
        }
        Ok(sys)
    }

    pub fn min_power_request(&self) -> Result<ExperimentRequest> {
        let bound = self.bound_table.as_ref().map(load_bound_table).transpose()?;
        let search = PowerSearchSpec {
            low_dbw: self.p1_low_dbw,
            high_dbw: self.p1_high_dbw,
            target_pd: self.target_pd,
            tolerance_db: self.tolerance_db.unwrap_or(self.profile.tolerance_db()),
            max_widenings: self.max_widenings,
        };
        search.validate()?;
        Ok(ExperimentRequest::MinPower(MinPowerRequest {
            system: self.system_for_all()?,
            kas: self.ka.clone(),
            variants: self.variants(),
            search,
            settings: self.settings(self.profile.search_trials()),
            bound,
        }))
    }

    pub fn min_np_request(&self) -> Result<ExperimentRequest> {
        let bound = self.require_bound("min-np")?;
        // The scan sets Np itself; the base system takes the first grid value.
        let first = *self.np_grid.first().ok_or_else(|| Error::param("np_grid", "at least one value is required"))?;
        let base = RunConfig { np: first, ..self.clone() };
        Ok(ExperimentRequest::MinNp(MinNpRequest {
            system: self.check_kas(base.system()?)?,
            kas: self.ka.clone(),
            variants: self.variants(),
            bound,
            alpha: self.alpha,
            target_pd: self.target_pd,
            np_grid: self.np_grid.clone(),
            settings: self.settings(self.profile.search_trials()),
            full_scan: self.full_scan,
        }))
    }

    pub fn roc_request(&self) -> Result<ExperimentRequest> {
        let bound = self.require_bound("roc")?;
        Ok(ExperimentRequest::Roc(RocRequest {
            system: self.system_for_all()?,
            kas: self.ka.clone(),
            algorithms: self.algorithm.clone(),
            gomp_l: self.gomp_l,
            bound,
            alpha: self.alpha,
            ka_design: self.ka_design,
            threshold_levels: self.threshold_levels,
            settings: self.settings(self.profile.roc_trials()),
        }))
    }
}

/// Maps an error to its process exit status.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter { .. }
        | Error::Parse { .. }
        | Error::Range(_)
        | Error::Infeasible(_)
        | Error::Dimension(_)
        | Error::Contract(_) => EXIT_CONFIG,
        Error::SearchFailure(_) => EXIT_SEARCH,
        _ => EXIT_FAILURE,
    }
}

fn search_failures(report: &ExperimentReport) -> Vec<String> {
    match &report.results {
        ExperimentResults::MinPower(rows) => rows
            .iter()
            .filter_map(|r| match &r.result.outcome {
                SearchOutcome::NotBracketed { reason } => {
                    Some(format!("Ka = {}, {}: {reason}", r.ka, r.variant.algorithm))
                }
                SearchOutcome::Found { .. } => None,
            })
            .collect(),
        ExperimentResults::MinNp(rows) => rows
            .iter()
            .filter(|r| r.result.min_np.is_none())
            .map(|r| format!("Ka = {}, {}: no grid Np reaches the target", r.ka, r.variant.algorithm))
            .collect(),
        ExperimentResults::Roc(_) => Vec::new(),
    }
}

fn emit_report(report: &ExperimentReport, output: Option<&Path>, json: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(p) => report.write_files(Some(p), None)?,
        None => report.write_csv(&mut *out)?,
    }
    report.write_files(None, json)?;
    let failures = search_failures(report);
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::SearchFailure(failures.join("; ")))
    }
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn cmd_single_run(c: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let sys = c.system()?;
    let alg = *c.algorithm.first().ok_or_else(|| Error::param("algorithm", "at least one value is required"))?;
    let params = RecoveryParams::known_sparsity(alg, sys.ka, c.excess, c.gomp_l);
    let r = single_run(&sys, db_to_linear(c.p1_dbw), &params, &c.settings(1))?;
    let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    let mut text = String::new();
    text += &format!("algorithm {alg}\nka {}\nnp {}\nbp {}\np1_dbw {}\n", sys.ka, sys.np, sys.bp, c.p1_dbw);
    text += &format!("seeds matrix={} supports={} noise={}\n", r.matrix_seed, r.support_seed, r.noise_seed);
    text += &format!("support {}\nestimate {}\n", list(&r.truth), list(&r.output.support_estimate));
    text += &format!(
        "hits {}\nmisses {} [{}]\nfalse_alarms {} [{}]\n",
        r.outcome.true_positives,
        r.misses.len(),
        list(&r.misses),
        r.false_alarms.len(),
        list(&r.false_alarms)
    );
    text += &format!("iterations {}\nrank_deficient {}\n", r.output.iterations, r.output.rank_deficient);
    for (i, t) in r.output.trace.iter().enumerate() {
        text += &format!("iter {} picked [{}] residual {:e}\n", i + 1, list(&t.picked), t.residual_norm);
    }
    text += &format!("final_residual {:e}\n", r.output.residual_norm);
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    if let Some(p) = &c.report {
        std::fs::write(p, serde_json::to_string_pretty(&r)?).map_err(|source| Error::Io {
            path: p.clone(),
            source,
        })?;
    }
    Ok(())
}

fn cmd_replay(a: &ReplayArgs, out: &mut dyn Write) -> Result<()> {
    let original = ExperimentReport::from_json(&read_file(&a.report)?)?;
    let mut request = original.request.clone();
    let settings = match &mut request {
        ExperimentRequest::MinPower(r) => &mut r.settings,
        ExperimentRequest::MinNp(r) => &mut r.settings,
        ExperimentRequest::Roc(r) => &mut r.settings,
    };
    settings.workers = a.workers;
    let replayed = run_experiment(&request)?;
    match &a.output {
        Some(p) => replayed.write_files(Some(p), None)?,
        None => replayed.write_csv(&mut *out)?,
    }
    if replayed.results != original.results {
        return Err(Error::Contract(format!(
            "replay of {} does not reproduce the stored results",
            a.report.display()
        )));
    }
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let experiment = |args: &RunArgs, build: fn(&RunConfig) -> Result<ExperimentRequest>, out: &mut dyn Write| {
        let c = args.resolve()?;
        let report = run_experiment(&build(&c)?)?;
        emit_report(&report, c.output.as_deref(), c.report.as_deref(), out)
    };
    match &cli.command {
        Command::SingleRun(a) => cmd_single_run(&a.resolve()?, out),
        Command::MinPower(a) => experiment(a, RunConfig::min_power_request, out),
        Command::MinNp(a) => experiment(a, RunConfig::min_np_request, out),
        Command::Roc(a) => experiment(a, RunConfig::roc_request, out),
        Command::Replay(a) => cmd_replay(a, out),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status. Tables go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunArgs {
        let cli = Cli::try_parse_from(std::iter::once("umacs").chain(args.iter().copied())).unwrap();
        match cli.command {
            Command::MinPower(a) | Command::SingleRun(a) | Command::MinNp(a) | Command::Roc(a) => a,
            Command::Replay(_) => unreachable!(),
        }
    }

    #[test]
    fn defaults_match_reference_setup() {
        let c = RunConfig::default();
        assert_eq!((c.b, c.bp, c.nt, c.np), (100, 15, 30_000, 2_000));
        assert_eq!(c.target_pd, 0.999);
        assert_eq!(c.gomp_l, 2);
        assert_eq!(c.alpha, 1.0);
    }

    #[test]
    fn lists_and_negative_values_parse() {
        let a = parse(&["min-power", "--ka", "25,50", "--algorithm", "omp,gomp", "--p1-low", "-18", "--profile", "paper"]);
        let c = a.resolve().unwrap();
        assert_eq!(c.ka, vec![25, 50]);
        assert_eq!(c.algorithm, vec![Algorithm::Omp, Algorithm::Gomp]);
        assert_eq!(c.p1_low_dbw, -18.0);
        assert_eq!(c.profile, Profile::Full);
    }

    #[test]
    fn flags_override_config_file_override_defaults() {
        let dir = std::env::temp_dir().join(format!("umacs-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.json");
        std::fs::write(&path, r#"{"np": 1500, "seed": 9, "ka": [40]}"#).unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["roc", "--config", p, "--seed", "3"]).resolve().unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.np, 1500);
        assert_eq!(c.ka, vec![40]);
        assert_eq!(c.bp, 15);
        std::fs::write(&path, r#"{"npp": 1}"#).unwrap();
        assert!(matches!(parse(&["roc", "--config", p]).resolve(), Err(Error::Parse { .. })));
    }

    #[test]
    fn exit_codes_are_distinct() {
        assert_eq!(exit_code(&Error::param("np", "x")), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::SearchFailure("x".into())), EXIT_SEARCH);
        assert_ne!(EXIT_CONFIG, EXIT_SEARCH);
    }
}
