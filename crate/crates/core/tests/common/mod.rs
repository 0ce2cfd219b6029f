#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use umacs::model::SensingMatrix;

/// Dense sensing matrix rebuilt from the orthonormal DCT-II definition
/// `c[r][j] = w_r cos(pi (2j + 1) r / 2N)` on the matrix's selected rows,
/// with every column rescaled to squared norm `Np * P1`.
pub fn dense_oracle(m: &SensingMatrix) -> DMatrix<f64> {
    let n = m.num_columns();
    let rows = m.row_selection();
    let mut a = DMatrix::<f64>::zeros(rows.len(), n);
    for (i, &r) in rows.iter().enumerate() {
        let w = if r == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        for j in 0..n {
            a[(i, j)] = w * (PI * (2 * j + 1) as f64 * r as f64 / (2 * n) as f64).cos();
        }
    }
    let target = (rows.len() as f64 * m.p1()).sqrt();
    for j in 0..n {
        let norm = a.column(j).norm();
        a.column_mut(j).scale_mut(target / norm);
    }
    a
}

/// Least-squares residual norm of `y` on the columns `cols` of `a`.
pub fn ls_residual(a: &DMatrix<f64>, y: &DVector<f64>, cols: &[usize]) -> f64 {
    let sub = a.select_columns(cols);
    let svd = sub.clone().svd(true, true);
    let z = svd.solve(y, 1e-12).expect("svd solve");
    (y - sub * z).norm()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive best `k`-subset and whether it beats the runner-up by more
/// than `gap`.
pub fn exhaustive_best(a: &DMatrix<f64>, y: &DVector<f64>, k: usize, gap: f64) -> (Vec<usize>, bool) {
    let mut scored: Vec<(f64, Vec<usize>)> = subsets(a.ncols(), k)
        .into_iter()
        .map(|s| (ls_residual(a, y, &s), s))
        .collect();
    scored.sort_by(|x, y| x.0.total_cmp(&y.0));
    let unique = scored.len() < 2 || scored[1].0 - scored[0].0 > gap;
    (scored.swap_remove(0).1, unique)
}

pub fn temp_dir(tag: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("umacs-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

pub fn bound_table_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/achievability_bound.csv")
}
