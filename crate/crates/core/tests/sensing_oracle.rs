mod common;

use nalgebra::DVector;
use umacs::model::{build_sensing_matrix, transmit, ReceivedSignal, SupportSet};
use umacs::recovery::{omp, recover, Algorithm, RecoveryParams};

#[test]
fn matrix_matches_dct_definition() {
    for (bp, np, seed) in [(4, 16, 0), (6, 20, 1), (9, 77, 2), (11, 300, 3)] {
        let m = build_sensing_matrix(bp, np, 0.37, seed).unwrap();
        let a = common::dense_oracle(&m);
        let scale = (np as f64 * 0.37).sqrt();
        for j in 0..m.num_columns() {
            let col = m.column(j).unwrap();
            for (i, v) in col.iter().enumerate() {
                assert!((v - a[(i, j)]).abs() <= 1e-12 * scale, "bp={bp} ({i},{j})");
            }
        }
        let r = DVector::from_fn(np, |i, _| ((i * 7919) % 23) as f64 - 11.0);
        let fast = m.correlate(r.as_slice()).unwrap();
        let dense = a.transpose() * &r;
        for (f, d) in fast.iter().zip(dense.iter()) {
            assert!((f - d).abs() <= 1e-9 * r.norm() * scale);
        }
    }
}

#[test]
fn full_square_two_sparse_is_exact_for_every_decoder() {
    let m = build_sensing_matrix(4, 16, 1.0, 3).unwrap();
    for alg in Algorithm::ALL {
        let params = RecoveryParams::known_sparsity(alg, 2, 0.0, 2);
        for pair in common::subsets(16, 2) {
            let y = ReceivedSignal::new(transmit(&m, &SupportSet::new(pair.clone(), false).unwrap()).unwrap());
            assert_eq!(recover(&y, &m, &params).unwrap().support_estimate, pair, "{alg}");
        }
    }
}

/// Textbook OMP on the dense oracle matrix: pick the largest |<a_j, r>|
/// (smallest index on ties), refit by least squares, repeat.
fn reference_omp(a: &nalgebra::DMatrix<f64>, y: &DVector<f64>, k: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut r = y.clone();
    for _ in 0..k {
        let c = a.transpose() * &r;
        let mut best = usize::MAX;
        for j in 0..a.ncols() {
            if chosen.contains(&j) {
                continue;
            }
            if best == usize::MAX || c[j].abs() > c[best].abs() {
                best = j;
            }
        }
        chosen.push(best);
        let sub = a.select_columns(&chosen);
        let z = sub.clone().svd(true, true).solve(y, 1e-12).unwrap();
        r = y - sub * z;
    }
    chosen.sort_unstable();
    chosen
}

#[test]
fn omp_agrees_with_reference_greedy_on_subsampled_rows() {
    for seed in 0..5 {
        let m = build_sensing_matrix(4, 12, 1.0, 7 + seed).unwrap();
        let a = common::dense_oracle(&m);
        for pair in common::subsets(16, 2) {
            let y = transmit(&m, &SupportSet::new(pair, false).unwrap()).unwrap();
            let expected = reference_omp(&a, &DVector::from_column_slice(&y), 2);
            assert_eq!(omp(&ReceivedSignal::new(y), &m, 2).unwrap().support_estimate, expected);
        }
    }
}

#[test]
fn greedy_failures_on_subsampled_rows_are_forced_by_the_first_pick() {
    // Whenever OMP misses the exhaustive optimum, the first correlation peak
    // already lies outside the true support.
    for seed in 0..5 {
        let m = build_sensing_matrix(4, 12, 1.0, 7 + seed).unwrap();
        let a = common::dense_oracle(&m);
        for pair in common::subsets(16, 2) {
            let y = DVector::from_column_slice(&transmit(&m, &SupportSet::new(pair.clone(), false).unwrap()).unwrap());
            let (best, unique) = common::exhaustive_best(&a, &y, 2, 1e-9);
            assert!(unique);
            assert_eq!(best, pair);
            if reference_omp(&a, &y, 2) != best {
                let c = a.transpose() * &y;
                let peak = (0..16).max_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs())).unwrap();
                assert!(!pair.contains(&peak));
            }
        }
    }
}
