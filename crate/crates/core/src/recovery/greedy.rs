use super::lstsq::GrowingProjection;
use super::select::top_by_magnitude;
use super::{check_signal, rank_by_magnitude, Algorithm, IterationTrace, RecoveryOutput, RecoveryParams};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::model::{ReceivedSignal, SensingMatrix};

struct Accumulated {
    projection: GrowingProjection,
    trace: Vec<IterationTrace>,
}

impl Accumulated {
    fn amplitudes(&self) -> Vec<(usize, f64)> {
        let mut pairs: Vec<(usize, f64)> = self
            .projection
            .indices()
            .iter()
            .copied()
            .zip(self.projection.coefficients())
            .collect();
        pairs.sort_unstable_by_key(|&(j, _)| j);
        pairs
    }

    fn into_output(self, declared: impl FnOnce(&[(usize, f64)], &[usize]) -> Vec<usize>) -> RecoveryOutput {
        let amplitudes = self.amplitudes();
        let ranked_candidates = rank_by_magnitude(&amplitudes);
        let mut support_estimate = declared(&amplitudes, &ranked_candidates);
        support_estimate.sort_unstable();
        RecoveryOutput {
            support_estimate,
            residual_norm: norm(self.projection.residual()),
            iterations: self.trace.len(),
            ranked_candidates,
            rank_deficient: self.projection.rank_deficient(),
            amplitudes,
            trace: self.trace,
        }
    }
}

/// OMP-style accumulation: each iteration adds the `per_iteration` columns
/// most correlated with the residual (never reselecting) and re-projects `y`
/// onto everything selected so far.
///
/// The epsilon guard is evaluated before iterations 2, 3, ...: the first
/// iteration always runs.
fn accumulate(
    y: &ReceivedSignal,
    matrix: &SensingMatrix,
    per_iteration: usize,
    max_iterations: usize,
    epsilon: Option<f64>,
) -> Result<Accumulated> {
    let mut projection = GrowingProjection::new(&y.samples);
    let mut selected = vec![false; matrix.num_columns()];
    let mut trace = Vec::with_capacity(max_iterations);
    let mut remaining = matrix.num_columns();

    for iteration in 1..=max_iterations {
        if iteration > 1 {
            if let Some(eps) = epsilon {
                if norm(projection.residual()) <= eps {
                    break;
                }
            }
        }
        if remaining == 0 {
            break;
        }
        let corr = matrix.correlate(projection.residual())?;
        let picked = top_by_magnitude(&corr, &selected, per_iteration.min(remaining))?;
        for &j in &picked {
            selected[j] = true;
            projection.push(matrix, j)?;
        }
        remaining -= picked.len();
        trace.push(IterationTrace {
            picked,
            residual_norm: norm(projection.residual()),
        });
    }
    Ok(Accumulated { projection, trace })
}

/// Orthogonal matching pursuit with exactly `k` iterations.
pub fn omp(y: &ReceivedSignal, matrix: &SensingMatrix, k: usize) -> Result<RecoveryOutput> {
    check_signal(y, matrix)?;
    if k == 0 || k > matrix.num_rows() {
        return Err(Error::Infeasible(format!(
            "OMP sparsity {k} must lie in 1..={}",
            matrix.num_rows()
        )));
    }
    let acc = accumulate(y, matrix, 1, k, None)?;
    Ok(acc.into_output(|amps, _| amps.iter().map(|&(j, _)| j).collect()))
}

/// Generalized OMP: `l` picks per iteration, at most `k` iterations, early
/// stop once `||r|| <= epsilon`; the `k` largest amplitudes form the support.
pub fn gomp(y: &ReceivedSignal, matrix: &SensingMatrix, k: usize, l: usize, epsilon: f64) -> Result<RecoveryOutput> {
    check_signal(y, matrix)?;
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    if l == 0 {
        return Err(Error::param("gomp_l", "must be at least 1"));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::param("epsilon", "must be non-negative"));
    }
    let acc = accumulate(y, matrix, l, k, Some(epsilon))?;
    Ok(acc.into_output(|_, ranked| ranked.iter().take(k).copied().collect()))
}

/// Sparsity-agnostic decoding. Runs the OMP (`l = 1`) or gOMP accumulation
/// until the residual drops to `params.epsilon` or `params.max_iterations`
/// is reached, then declares every candidate with `|amplitude| > threshold`.
pub fn recover_thresholded(
    y: &ReceivedSignal,
    matrix: &SensingMatrix,
    params: &RecoveryParams,
    threshold: f64,
) -> Result<RecoveryOutput> {
    check_signal(y, matrix)?;
    params.validate()?;
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::param("threshold", "must be non-negative"));
    }
    let per_iteration = match params.algorithm {
        Algorithm::Omp => 1,
        Algorithm::Gomp => params.gomp_l,
        other => {
            return Err(Error::Contract(format!(
                "thresholded decoding supports omp and gomp, not {other}"
            )))
        }
    };
    let eps = params.epsilon_for(&y.samples);
    let acc = accumulate(y, matrix, per_iteration, params.max_iterations, Some(eps))?;
    Ok(acc.into_output(|amps, _| {
        amps.iter()
            .filter(|(_, a)| a.abs() > threshold)
            .map(|&(j, _)| j)
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::model::{add_noise, build_sensing_matrix, sample_supports, transmit, SupportSet};

    fn noiseless(matrix: &SensingMatrix, support: &[usize]) -> ReceivedSignal {
        let s = SupportSet::new(support.to_vec(), false).unwrap();
        ReceivedSignal::new(transmit(matrix, &s).unwrap())
    }

    #[test]
    fn omp_single_column() {
        let a = build_sensing_matrix(10, 100, 0.2, 1).unwrap();
        let y = noiseless(&a, &[321]);
        let out = omp(&y, &a, 1).unwrap();
        assert_eq!(out.support_estimate, vec![321]);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn omp_two_sparse_noiseless() {
        let a = build_sensing_matrix(10, 100, 0.2, 1).unwrap();
        let y = noiseless(&a, &[12, 700]);
        let out = omp(&y, &a, 2).unwrap();
        assert_eq!(out.support_estimate, vec![12, 700]);
        assert!(out.residual_norm <= 1e-9 * y.norm());
        assert!((out.amplitude(12).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn omp_rejects_bad_sparsity() {
        let a = build_sensing_matrix(6, 10, 1.0, 1).unwrap();
        let y = noiseless(&a, &[3]);
        assert!(omp(&y, &a, 0).is_err());
        assert!(omp(&y, &a, 11).is_err());
        assert!(omp(&ReceivedSignal::new(vec![0.0; 9]), &a, 1).is_err());
    }

    #[test]
    fn omp_residual_shrinks_and_stays_orthogonal() {
        let a = build_sensing_matrix(10, 200, 0.05, 4).unwrap();
        let s = sample_supports(15, 10, 2, false).unwrap();
        let y = add_noise(&transmit(&a, &s).unwrap(), 3);
        let out = omp(&y, &a, 15).unwrap();
        let mut prev = y.norm();
        for t in &out.trace {
            assert!(t.residual_norm <= prev + 1e-10);
            prev = t.residual_norm;
        }
        assert_eq!(out.support_estimate.len(), 15);
        // final residual is orthogonal to every selected column
        let z: Vec<(usize, f64)> = out.amplitudes.clone();
        let mut r = y.samples.clone();
        for &(j, c) in &z {
            crate::linalg::axpy(-c, &a.column(j).unwrap(), &mut r);
        }
        for &(j, _) in &z {
            let col = a.column(j).unwrap();
            assert!(dot(&r, &col).abs() <= 1e-8 * y.norm() * norm(&col));
        }
    }

    #[test]
    fn gomp_two_picks_one_iteration() {
        let a = build_sensing_matrix(10, 120, 0.2, 6).unwrap();
        let y = noiseless(&a, &[5, 1000]);
        let out = gomp(&y, &a, 2, 2, 1e-6 * y.norm()).unwrap();
        assert_eq!(out.support_estimate, vec![5, 1000]);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn gomp_huge_epsilon_still_runs_once() {
        let a = build_sensing_matrix(10, 120, 0.2, 6).unwrap();
        let y = noiseless(&a, &[5, 1000, 17]);
        let out = gomp(&y, &a, 3, 2, 2.0 * y.norm()).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.trace[0].picked.len(), 2);
        assert_eq!(out.support_estimate.len(), 2);
    }

    #[test]
    fn gomp_with_one_pick_follows_omp() {
        let a = build_sensing_matrix(11, 300, 0.03, 9).unwrap();
        let s = sample_supports(12, 11, 4, false).unwrap();
        let y = add_noise(&transmit(&a, &s).unwrap(), 5);
        let o = omp(&y, &a, 12).unwrap();
        let g = gomp(&y, &a, 12, 1, 0.0).unwrap();
        let os: Vec<_> = o.trace.iter().map(|t| t.picked.clone()).collect();
        let gs: Vec<_> = g.trace.iter().map(|t| t.picked.clone()).collect();
        assert_eq!(os, gs);
        assert_eq!(o.support_estimate, g.support_estimate);
    }

    #[test]
    fn thresholded_degenerate_thresholds() {
        let a = build_sensing_matrix(10, 200, 0.1, 3).unwrap();
        let s = sample_supports(6, 10, 8, false).unwrap();
        let y = add_noise(&transmit(&a, &s).unwrap(), 9);
        let params = RecoveryParams::thresholded(Algorithm::Omp, 6, 200, 2);
        let all = recover_thresholded(&y, &a, &params, 0.0).unwrap();
        let cands: Vec<usize> = all.amplitudes.iter().map(|&(j, _)| j).collect();
        assert_eq!(all.support_estimate, cands);
        let none = recover_thresholded(&y, &a, &params, f64::INFINITY).unwrap();
        assert!(none.support_estimate.is_empty());
    }

    #[test]
    fn thresholded_noiseless_pair() {
        let a = build_sensing_matrix(10, 200, 0.1, 3).unwrap();
        let y = noiseless(&a, &[44, 901]);
        for alg in [Algorithm::Omp, Algorithm::Gomp] {
            let mut params = RecoveryParams::thresholded(alg, 4, 200, 2);
            params.epsilon = Some(1e-9 * y.norm());
            let out = recover_thresholded(&y, &a, &params, 0.5).unwrap();
            assert_eq!(out.support_estimate, vec![44, 901], "{alg}");
        }
    }

    #[test]
    fn thresholded_rejects_pruning_algorithms() {
        let a = build_sensing_matrix(6, 20, 1.0, 3).unwrap();
        let y = noiseless(&a, &[4]);
        let params = RecoveryParams::thresholded(Algorithm::Cosamp, 2, 20, 2);
        assert!(matches!(recover_thresholded(&y, &a, &params, 0.5), Err(Error::Contract(_))));
    }
}
