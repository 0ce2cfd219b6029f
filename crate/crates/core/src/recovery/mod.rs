//! Greedy sparse recovery: OMP, generalized OMP, CoSaMP and subspace pursuit,
//! plus the amplitude-thresholded variant used when the number of active
//! users is unknown.

mod greedy;
mod lstsq;
mod pruned;
mod select;

pub use greedy::{gomp, omp, recover_thresholded};
pub use lstsq::{least_squares, GrowingProjection, LsSolution, RANK_TOL};
pub use pruned::{cosamp, sp};
pub use select::correlate_select;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ReceivedSignal, SensingMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Omp,
    Gomp,
    Cosamp,
    Sp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Omp, Algorithm::Gomp, Algorithm::Cosamp, Algorithm::Sp];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Omp => "omp",
            Algorithm::Gomp => "gomp",
            Algorithm::Cosamp => "cosamp",
            Algorithm::Sp => "sp",
        }
    }

    /// Smallest `Np` for which the least-squares steps stay overdetermined
    /// with sparsity `k` (and `L` picks per gOMP iteration).
    pub fn min_rows(self, k: usize, gomp_l: usize) -> usize {
        match self {
            Algorithm::Omp => k,
            Algorithm::Gomp => k * gomp_l,
            Algorithm::Cosamp => 3 * k,
            Algorithm::Sp => 2 * k,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "omp" => Ok(Algorithm::Omp),
            "gomp" => Ok(Algorithm::Gomp),
            "cosamp" => Ok(Algorithm::Cosamp),
            "sp" => Ok(Algorithm::Sp),
            other => Err(Error::param("algorithm", format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Decoder configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryParams {
    pub algorithm: Algorithm,
    /// Sparsity handed to the decoder, possibly above the true `Ka`.
    pub k_input: usize,
    /// Picks per iteration for gOMP.
    pub gomp_l: usize,
    /// Residual-norm stopping threshold. `None` means `1e-6 * ||y||`.
    pub epsilon: Option<f64>,
    pub max_iterations: usize,
}

/// gOMP picks per iteration used throughout the experiments.
pub const DEFAULT_GOMP_L: usize = 2;

/// Relative residual threshold used when no explicit epsilon is set.
pub const DEFAULT_RELATIVE_EPSILON: f64 = 1e-6;

/// `ceil((1 + excess) * ka)`, computed so that e.g. `1.1 * 100` gives 110.
pub fn sparsity_with_excess(ka: usize, excess: f64) -> usize {
    let extra = excess * ka as f64;
    ka + (extra - 1e-9).ceil().max(0.0) as usize
}

/// Residual norm at which the thresholded loop stops, for unit noise: the
/// norm of noise projected off `fitted` columns has mean about
/// `sqrt(Np - fitted)` and standard deviation about `1 / sqrt(2)`; the
/// threshold sits three deviations below that mean. Any residual above it is
/// consistent with unexplained signal, so the loop runs to its cap unless
/// the fit has absorbed more than plausible noise.
pub fn noise_floor_epsilon(np: usize, fitted: usize) -> f64 {
    let dof = np.saturating_sub(fitted) as f64;
    (dof.sqrt() - 3.0 / 2f64.sqrt()).max(0.0)
}

impl RecoveryParams {
    /// Known-sparsity decoding of `ka` users with sparsity excess `excess`.
    pub fn known_sparsity(algorithm: Algorithm, ka: usize, excess: f64, gomp_l: usize) -> Self {
        let k = sparsity_with_excess(ka, excess);
        RecoveryParams {
            algorithm,
            k_input: k,
            gomp_l,
            epsilon: None,
            max_iterations: k,
        }
    }

    /// Sparsity-agnostic decoding: accumulate up to `ceil(1.5 * ka_design)`
    /// iterations or until the residual reaches the noise floor.
    pub fn thresholded(algorithm: Algorithm, ka_design: usize, np: usize, gomp_l: usize) -> Self {
        let max_iterations = (3 * ka_design).div_ceil(2).max(1);
        RecoveryParams {
            algorithm,
            k_input: max_iterations,
            gomp_l,
            epsilon: Some(noise_floor_epsilon(np, max_iterations)),
            max_iterations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_input == 0 {
            return Err(Error::param("k_input", "must be at least 1"));
        }
        if self.gomp_l == 0 {
            return Err(Error::param("gomp_l", "must be at least 1"));
        }
        if let Some(eps) = self.epsilon {
            if !(eps >= 0.0) {
                return Err(Error::param("epsilon", "must be non-negative"));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn epsilon_for(&self, y: &[f64]) -> f64 {
        self.epsilon
            .unwrap_or_else(|| DEFAULT_RELATIVE_EPSILON * crate::linalg::norm(y))
    }
}

/// What one decoder iteration did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    /// Indices picked by correlation this iteration, strongest first.
    pub picked: Vec<usize>,
    /// Residual norm after the iteration's update.
    pub residual_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOutput {
    /// Declared active columns, ascending.
    pub support_estimate: Vec<usize>,
    /// Least-squares amplitudes of the final candidate set, ascending by index.
    pub amplitudes: Vec<(usize, f64)>,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Candidate indices by decreasing `|amplitude|` (ties: smaller index first).
    pub ranked_candidates: Vec<usize>,
    /// Set when some least-squares step hit linearly dependent columns.
    pub rank_deficient: bool,
    pub trace: Vec<IterationTrace>,
}

impl RecoveryOutput {
    pub fn amplitude(&self, j: usize) -> Option<f64> {
        self.amplitudes
            .binary_search_by_key(&j, |&(i, _)| i)
            .ok()
            .map(|p| self.amplitudes[p].1)
    }

    /// Candidates with `|amplitude| > threshold`, ascending.
    pub fn declared_above(&self, threshold: f64) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .amplitudes
            .iter()
            .filter(|(_, a)| a.abs() > threshold)
            .map(|&(j, _)| j)
            .collect();
        out.sort_unstable();
        out
    }
}

/// Known-sparsity decoding with the algorithm named in `params`.
pub fn recover(y: &ReceivedSignal, matrix: &SensingMatrix, params: &RecoveryParams) -> Result<RecoveryOutput> {
    params.validate()?;
    let eps = params.epsilon_for(&y.samples);
    match params.algorithm {
        Algorithm::Omp => omp(y, matrix, params.k_input),
        Algorithm::Gomp => gomp(y, matrix, params.k_input, params.gomp_l, eps),
        Algorithm::Cosamp => cosamp(y, matrix, params.k_input, eps),
        Algorithm::Sp => sp(y, matrix, params.k_input, eps),
    }
}

/// Sorts `(index, amplitude)` pairs by decreasing magnitude, ties by index.
pub(crate) fn rank_by_magnitude(pairs: &[(usize, f64)]) -> Vec<usize> {
    let mut v: Vec<(usize, f64)> = pairs.to_vec();
    v.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(j, _)| j).collect()
}

pub(crate) fn check_signal(y: &ReceivedSignal, matrix: &SensingMatrix) -> Result<()> {
    if y.len() != matrix.num_rows() {
        return Err(Error::Dimension(format!(
            "received signal has {} samples, matrix has {} rows",
            y.len(),
            matrix.num_rows()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn excess_rounding() {
        assert_eq!(sparsity_with_excess(100, 0.1), 110);
        assert_eq!(sparsity_with_excess(25, 0.1), 28);
        assert_eq!(sparsity_with_excess(50, 0.0), 50);
        assert_eq!(sparsity_with_excess(150, 0.1), 165);
        assert_eq!(sparsity_with_excess(1, 0.1), 2);
    }

    #[test]
    fn thresholded_defaults() {
        let p = RecoveryParams::thresholded(Algorithm::Omp, 50, 2000, 2);
        assert_eq!(p.max_iterations, 75);
        let eps = p.epsilon.unwrap();
        assert!((eps - (1925f64.sqrt() - 3.0 / 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(noise_floor_epsilon(3, 3), 0.0);
        assert_eq!(RecoveryParams::thresholded(Algorithm::Omp, 25, 2000, 2).max_iterations, 38);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("lasso".parse::<Algorithm>().is_err());
    }

    #[test]
    fn ranking_breaks_ties_by_index() {
        let r = rank_by_magnitude(&[(5, 1.0), (2, -1.0), (9, 3.0), (1, 0.5)]);
        assert_eq!(r, vec![9, 2, 5, 1]);
    }

    #[test]
    fn params_validation() {
        let mut p = RecoveryParams::known_sparsity(Algorithm::Gomp, 10, 0.0, 2);
        assert!(p.validate().is_ok());
        p.gomp_l = 0;
        assert!(p.validate().is_err());
        p.gomp_l = 1;
        p.epsilon = Some(-1.0);
        assert!(p.validate().is_err());
    }
}
