//! CoSaMP and subspace pursuit: merge fresh correlation picks with the
//! current support, project, prune back to `k` entries.

use super::lstsq::least_squares;
use super::select::top_by_magnitude;
use super::{check_signal, rank_by_magnitude, IterationTrace, RecoveryOutput};
use crate::error::{Error, Result};
use crate::linalg::{axpy, norm};
use crate::model::{ReceivedSignal, SensingMatrix};

pub fn cosamp(y: &ReceivedSignal, matrix: &SensingMatrix, k: usize, epsilon: f64) -> Result<RecoveryOutput> {
    pruned_pursuit(y, matrix, k, 2 * k, epsilon, "CoSaMP")
}

pub fn sp(y: &ReceivedSignal, matrix: &SensingMatrix, k: usize, epsilon: f64) -> Result<RecoveryOutput> {
    pruned_pursuit(y, matrix, k, k, epsilon, "SP")
}

/// Shared loop. At most `k` iterations; the epsilon guard applies from the
/// second iteration on. When an iteration would project onto exactly the
/// merged set of the previous one the state is a fixed point and the loop
/// ends without changing the result.
fn pruned_pursuit(
    y: &ReceivedSignal,
    matrix: &SensingMatrix,
    k: usize,
    fresh: usize,
    epsilon: f64,
    name: &str,
) -> Result<RecoveryOutput> {
    check_signal(y, matrix)?;
    if k == 0 {
        return Err(Error::param("k", "must be at least 1"));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::param("epsilon", "must be non-negative"));
    }
    if k + fresh > matrix.num_rows() {
        return Err(Error::Infeasible(format!(
            "{name} with k = {k} merges up to {} columns but Np = {}",
            k + fresh,
            matrix.num_rows()
        )));
    }
    if fresh > matrix.num_columns() {
        return Err(Error::Infeasible(format!(
            "{name} picks {fresh} columns per iteration from only {}",
            matrix.num_columns()
        )));
    }

    let none_excluded = vec![false; matrix.num_columns()];
    let mut support: Vec<usize> = Vec::new();
    let mut residual = y.samples.clone();
    let mut amplitudes: Vec<(usize, f64)> = Vec::new();
    let mut previous_merged: Option<Vec<usize>> = None;
    let mut rank_deficient = false;
    let mut trace = Vec::new();
    let mut col = vec![0.0; matrix.num_rows()];

    for iteration in 1..=k {
        if iteration > 1 && norm(&residual) <= epsilon {
            break;
        }
        let corr = matrix.correlate(&residual)?;
        let picked = top_by_magnitude(&corr, &none_excluded, fresh)?;

        let mut merged = support.clone();
        merged.extend_from_slice(&picked);
        merged.sort_unstable();
        merged.dedup();
        if previous_merged.as_ref() == Some(&merged) {
            break;
        }

        let sub = matrix.submatrix(&merged)?;
        let sol = least_squares(&y.samples, sub.as_ref())?;
        rank_deficient |= sol.rank_deficient;
        amplitudes = merged.iter().copied().zip(sol.coefficients).collect();

        let ranked = rank_by_magnitude(&amplitudes);
        support = ranked[..k.min(ranked.len())].to_vec();
        support.sort_unstable();

        residual.copy_from_slice(&y.samples);
        for &j in &support {
            let p = merged.binary_search(&j).expect("support drawn from merged set");
            matrix.fill_column(j, &mut col)?;
            axpy(-amplitudes[p].1, &col, &mut residual);
        }
        trace.push(IterationTrace {
            picked,
            residual_norm: norm(&residual),
        });
        previous_merged = Some(merged);
    }

    Ok(RecoveryOutput {
        ranked_candidates: rank_by_magnitude(&amplitudes),
        support_estimate: support,
        amplitudes,
        residual_norm: norm(&residual),
        iterations: trace.len(),
        rank_deficient,
        trace,
    })
}
