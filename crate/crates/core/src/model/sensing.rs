use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::seq::index;
use rustdct::{DctPlanner, TransformType2And3};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Row-subsampled orthonormal DCT-II matrix with power-normalized columns.
///
/// Entry `(i, j)` is `scale_j * w_{r_i} * cos(pi * (2j + 1) * r_i / (2N))`
/// where `N = 2^bp`, `r_i` is the i-th selected row of the parent transform
/// and `w_r` is the orthonormal DCT-II row weight. `scale_j` makes
/// `||a_j||^2 = Np * P1` for every column.
///
/// The matrix is never stored densely. Products `A^T r` run through a fast
/// DCT-III of length `N`, and individual columns are synthesized from a
/// quarter-wave cosine table on demand.
#[derive(Clone)]
pub struct SensingMatrix {
    bp: u32,
    rows: Vec<usize>,
    row_weights: Vec<f64>,
    col_scales: Vec<f64>,
    p1: f64,
    seed: u64,
    cos_table: Arc<[f64]>,
    dct: Arc<dyn TransformType2And3<f64>>,
}

impl fmt::Debug for SensingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SensingMatrix")
            .field("bp", &self.bp)
            .field("np", &self.rows.len())
            .field("p1", &self.p1)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

/// Selects `np` distinct rows of the `2^bp`-point orthonormal DCT-II uniformly
/// at random and rescales every column to squared norm `np * p1`.
pub fn build_sensing_matrix(bp: u32, np: usize, p1: f64, seed: u64) -> Result<SensingMatrix> {
    if bp == 0 || bp > super::MAX_PREFIX_BITS {
        return Err(Error::param("bp", format!("must lie in 1..={}", super::MAX_PREFIX_BITS)));
    }
    let n = 1usize << bp;
    if np == 0 || np > n {
        return Err(Error::Infeasible(format!(
            "cannot select {np} rows from a {n}-point transform"
        )));
    }
    if !(p1.is_finite() && p1 > 0.0) {
        return Err(Error::param("p1", format!("must be positive and finite, got {p1}")));
    }

    let mut rng = rng_from_seed(seed);
    let rows = index::sample(&mut rng, n, np).into_vec();

    let dc_weight = (1.0 / n as f64).sqrt();
    let ac_weight = (2.0 / n as f64).sqrt();
    let row_weights: Vec<f64> = rows
        .iter()
        .map(|&r| if r == 0 { dc_weight } else { ac_weight })
        .collect();

    let period = 4 * n;
    let cos_table: Arc<[f64]> = (0..period)
        .map(|m| (PI * m as f64 / (2 * n) as f64).cos())
        .collect();

    // Squared norms of the unscaled columns. For a fixed row r the table index
    // (2j+1)r mod 4N advances by 2r per column.
    let mut norms = vec![0.0f64; n];
    for (&r, &w) in rows.iter().zip(&row_weights) {
        let w2 = w * w;
        let step = (2 * r) % period;
        let mut idx = r % period;
        for acc in norms.iter_mut() {
            let c = cos_table[idx];
            *acc += w2 * c * c;
            idx += step;
            if idx >= period {
                idx -= period;
            }
        }
    }

    let target = np as f64 * p1;
    let floor = 1e-12 * np as f64 / n as f64;
    let mut col_scales = Vec::with_capacity(n);
    for (j, &nrm2) in norms.iter().enumerate() {
        if nrm2 <= floor {
            return Err(Error::Infeasible(format!(
                "column {j} vanishes on the selected rows and cannot be normalized"
            )));
        }
        col_scales.push((target / nrm2).sqrt());
    }

    let dct = DctPlanner::new().plan_dct3(n);
    Ok(SensingMatrix {
        bp,
        rows,
        row_weights,
        col_scales,
        p1,
        seed,
        cos_table,
        dct,
    })
}

impl SensingMatrix {
    pub fn bp(&self) -> u32 {
        self.bp
    }

    /// Number of rows (channel uses), `Np`.
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of columns (messages), `2^bp`.
    pub fn num_columns(&self) -> usize {
        self.col_scales.len()
    }

    pub fn row_selection(&self) -> &[usize] {
        &self.rows
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Target squared column norm `Np * P1`.
    pub fn column_energy(&self) -> f64 {
        self.num_rows() as f64 * self.p1
    }

    #[inline]
    fn entry_unchecked(&self, i: usize, j: usize) -> f64 {
        let period = self.cos_table.len();
        let r = self.rows[i];
        let idx = ((2 * j as u64 + 1) * r as u64 % period as u64) as usize;
        self.col_scales[j] * self.row_weights[i] * self.cos_table[idx]
    }

    pub fn entry(&self, i: usize, j: usize) -> Result<f64> {
        self.check_column(j)?;
        if i >= self.num_rows() {
            return Err(Error::Dimension(format!("row {i} out of range 0..{}", self.num_rows())));
        }
        Ok(self.entry_unchecked(i, j))
    }

    pub(crate) fn check_column(&self, j: usize) -> Result<()> {
        if j >= self.num_columns() {
            return Err(Error::Dimension(format!(
                "column {j} out of range 0..{}",
                self.num_columns()
            )));
        }
        Ok(())
    }

    /// Writes column `j` into `out` (length `Np`).
    pub fn fill_column(&self, j: usize, out: &mut [f64]) -> Result<()> {
        self.check_column(j)?;
        if out.len() != self.num_rows() {
            return Err(Error::Dimension(format!(
                "column buffer has length {}, expected {}",
                out.len(),
                self.num_rows()
            )));
        }
        let period = self.cos_table.len() as u64;
        let odd = 2 * j as u64 + 1;
        let scale = self.col_scales[j];
        for ((o, &r), &w) in out.iter_mut().zip(&self.rows).zip(&self.row_weights) {
            let idx = (odd * r as u64 % period) as usize;
            *o = scale * w * self.cos_table[idx];
        }
        Ok(())
    }

    pub fn column(&self, j: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.num_rows()];
        self.fill_column(j, &mut out)?;
        Ok(out)
    }

    /// Columns `indices` gathered into a dense `Np x |indices|` matrix.
    pub fn submatrix(&self, indices: &[usize]) -> Result<faer::Mat<f64>> {
        let mut m = faer::Mat::<f64>::zeros(self.num_rows(), indices.len());
        for (c, &j) in indices.iter().enumerate() {
            self.fill_column(j, m.col_mut(c).try_as_col_major_mut().unwrap().as_slice_mut())?;
        }
        Ok(m)
    }

    /// Dense copy of the whole matrix. Only sensible for small `bp`.
    pub fn to_dense(&self) -> faer::Mat<f64> {
        let all: Vec<usize> = (0..self.num_columns()).collect();
        self.submatrix(&all).expect("indices in range")
    }

    /// `A^T r` for a residual of length `Np`, via one DCT-III of length `2^bp`.
    pub fn correlate(&self, residual: &[f64]) -> Result<Vec<f64>> {
        if residual.len() != self.num_rows() {
            return Err(Error::Dimension(format!(
                "residual has length {}, expected {}",
                residual.len(),
                self.num_rows()
            )));
        }
        let n = self.num_columns();
        let mut buf = vec![0.0; n];
        for ((&r, &w), &v) in self.rows.iter().zip(&self.row_weights).zip(residual) {
            // the unnormalized DCT-III halves the DC term
            buf[r] = if r == 0 { 2.0 * w * v } else { w * v };
        }
        self.dct.process_dct3(&mut buf);
        for (b, &s) in buf.iter_mut().zip(&self.col_scales) {
            *b *= s;
        }
        Ok(buf)
    }

    /// `A x` for a sparse `x` given as `(column, coefficient)` pairs.
    pub fn apply_sparse(&self, terms: &[(usize, f64)]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.num_rows()];
        let mut col = vec![0.0; self.num_rows()];
        for &(j, coef) in terms {
            self.fill_column(j, &mut col)?;
            for (o, c) in out.iter_mut().zip(&col) {
                *o += coef * c;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngExt;

    fn max_norm_error(a: &SensingMatrix) -> f64 {
        let target = a.column_energy();
        (0..a.num_columns())
            .map(|j| {
                let c = a.column(j).unwrap();
                let e: f64 = c.iter().map(|v| v * v).sum();
                (e - target).abs() / target
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn full_square_selects_every_row() {
        let a = build_sensing_matrix(4, 16, 1.0, 3).unwrap();
        let mut rows = a.row_selection().to_vec();
        rows.sort_unstable();
        assert_eq!(rows, (0..16).collect::<Vec<_>>());
        assert!(max_norm_error(&a) < 1e-12);
        for j in 0..16 {
            let c = a.column(j).unwrap();
            assert!((c.iter().map(|v| v * v).sum::<f64>() - 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_dimensions_hit_column_energy() {
        let a = build_sensing_matrix(15, 2000, 0.05, 11).unwrap();
        assert!((a.column_energy() - 100.0).abs() < 1e-12);
        let target = 100.0;
        for j in (0..a.num_columns()).step_by(97).chain([0, 32767]) {
            let c = a.column(j).unwrap();
            let e: f64 = c.iter().map(|v| v * v).sum();
            assert!((e - target).abs() / target < 1e-9, "column {j}: {e}");
        }
    }

    #[test]
    fn build_is_deterministic_in_seed() {
        let a = build_sensing_matrix(8, 40, 0.3, 99).unwrap();
        let b = build_sensing_matrix(8, 40, 0.3, 99).unwrap();
        let c = build_sensing_matrix(8, 40, 0.3, 100).unwrap();
        assert_eq!(a.row_selection(), b.row_selection());
        assert_eq!(a.to_dense(), b.to_dense());
        assert_ne!(a.row_selection(), c.row_selection());
    }

    #[test]
    fn rows_are_distinct_and_in_range() {
        let a = build_sensing_matrix(10, 700, 1.0, 5).unwrap();
        let mut rows = a.row_selection().to_vec();
        rows.sort_unstable();
        rows.dedup();
        assert_eq!(rows.len(), 700);
        assert!(rows.iter().all(|&r| r < 1024));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(build_sensing_matrix(4, 17, 1.0, 0), Err(Error::Infeasible(_))));
        assert!(matches!(build_sensing_matrix(4, 0, 1.0, 0), Err(Error::Infeasible(_))));
        assert!(matches!(build_sensing_matrix(4, 8, 0.0, 0), Err(Error::Parameter { .. })));
        assert!(matches!(build_sensing_matrix(4, 8, -1.0, 0), Err(Error::Parameter { .. })));
    }

    #[test]
    fn full_square_unscaled_is_orthonormal_dct() {
        // With Np = N every column of the orthonormal DCT already has unit norm,
        // so p1 = 1/N reproduces the parent transform up to row order.
        let n = 32;
        let a = build_sensing_matrix(5, n, 1.0 / n as f64, 1).unwrap();
        let dense = a.to_dense();
        let gram = dense.transpose() * &dense;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fast_correlation_matches_dense_product() {
        let a = build_sensing_matrix(9, 77, 0.7, 21).unwrap();
        let dense = a.to_dense();
        let mut rng = rng_from_seed(4);
        let r: Vec<f64> = (0..77).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fast = a.correlate(&r).unwrap();
        for j in 0..a.num_columns() {
            let direct: f64 = (0..77).map(|i| dense[(i, j)] * r[i]).sum();
            assert!((fast[j] - direct).abs() < 1e-11, "col {j}: {} vs {direct}", fast[j]);
        }
    }

    #[test]
    fn entry_and_column_agree() {
        let a = build_sensing_matrix(6, 20, 2.0, 8).unwrap();
        let c = a.column(13).unwrap();
        for (i, v) in c.iter().enumerate() {
            assert_eq!(*v, a.entry(i, 13).unwrap());
        }
        assert!(a.column(64).is_err());
        assert!(a.entry(20, 0).is_err());
    }
}
