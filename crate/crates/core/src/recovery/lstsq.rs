//! Least-squares projections onto selected columns.
//!
//! [`least_squares`] is the general solver: Householder QR when the selected
//! columns have full column rank, minimum-norm SVD solution otherwise.
//! [`GrowingProjection`] serves the OMP-style loops, where the selection only
//! ever grows: it keeps a thin QR factor updated by Gram-Schmidt with one
//! reorthogonalization pass, so adding a column costs `O(Np * |T|)`.

use faer::prelude::*;
use faer::MatRef;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm};
use crate::model::SensingMatrix;

/// Relative threshold on `|R_ii| / max |R_jj|` (and on singular values) below
/// which the selection is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution {
    pub coefficients: Vec<f64>,
    /// True when the selected columns were (numerically) linearly dependent
    /// and the minimum-norm solution was returned.
    pub rank_deficient: bool,
}

/// Minimizer of `||y - A z||` over `z`.
pub fn least_squares(y: &[f64], a: MatRef<'_, f64>) -> Result<LsSolution> {
    if a.ncols() == 0 {
        return Err(Error::Contract("least squares needs at least one column".into()));
    }
    if y.len() != a.nrows() {
        return Err(Error::Dimension(format!(
            "observation has length {}, matrix has {} rows",
            y.len(),
            a.nrows()
        )));
    }
    let rhs = Mat::<f64>::from_fn(y.len(), 1, |i, _| y[i]);

    if a.ncols() <= a.nrows() {
        let qr = a.qr();
        let r = qr.thin_R();
        let diag_max = (0..r.ncols()).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
        let full_rank = diag_max > 0.0 && (0..r.ncols()).all(|i| r[(i, i)].abs() > RANK_TOL * diag_max);
        if full_rank {
            let z = qr.solve_lstsq(&rhs);
            return Ok(LsSolution {
                coefficients: (0..a.ncols()).map(|i| z[(i, 0)]).collect(),
                rank_deficient: false,
            });
        }
    }
    min_norm(&rhs, a)
}

fn min_norm(rhs: &Mat<f64>, a: MatRef<'_, f64>) -> Result<LsSolution> {
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Contract(format!("SVD did not converge: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let s_max = (0..s.nrows()).map(|i| s[i]).fold(0.0, f64::max);
    let mut z = vec![0.0; a.ncols()];
    for k in 0..s.nrows() {
        if s_max == 0.0 || s[k] <= RANK_TOL * s_max {
            continue;
        }
        let coef = (0..u.nrows()).map(|i| u[(i, k)] * rhs[(i, 0)]).sum::<f64>() / s[k];
        for (c, zc) in z.iter_mut().enumerate() {
            *zc += v[(c, k)] * coef;
        }
    }
    Ok(LsSolution {
        coefficients: z,
        rank_deficient: true,
    })
}

/// Projection of `y` onto a growing set of columns of a [`SensingMatrix`].
#[derive(Debug, Clone)]
pub struct GrowingProjection {
    y: Vec<f64>,
    indices: Vec<usize>,
    /// Orthonormal basis, one column per selected index (while full rank).
    q: Vec<Vec<f64>>,
    /// Upper-triangular factor stored column by column.
    r: Vec<Vec<f64>>,
    /// `Q^T y`, accumulated by modified Gram-Schmidt on `y`.
    qty: Vec<f64>,
    residual: Vec<f64>,
    dependent: bool,
    scratch: Vec<f64>,
}

impl GrowingProjection {
    pub fn new(y: &[f64]) -> Self {
        GrowingProjection {
            y: y.to_vec(),
            indices: Vec::new(),
            q: Vec::new(),
            r: Vec::new(),
            qty: Vec::new(),
            residual: y.to_vec(),
            dependent: false,
            scratch: vec![0.0; y.len()],
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn rank_deficient(&self) -> bool {
        self.dependent
    }

    /// Appends column `j` and refreshes the residual.
    pub fn push(&mut self, matrix: &SensingMatrix, j: usize) -> Result<()> {
        matrix.fill_column(j, &mut self.scratch)?;
        self.indices.push(j);
        if self.dependent {
            return self.refresh_dense(matrix);
        }

        let mut w = std::mem::take(&mut self.scratch);
        let col_norm = norm(&w);
        let mut rcol = vec![0.0; self.q.len() + 1];
        for _pass in 0..2 {
            for (k, qk) in self.q.iter().enumerate() {
                let h = dot(qk, &w);
                axpy(-h, qk, &mut w);
                rcol[k] += h;
            }
        }
        let rho = norm(&w);
        if !(rho > RANK_TOL * col_norm) {
            self.scratch = w;
            self.dependent = true;
            return self.refresh_dense(matrix);
        }
        for v in w.iter_mut() {
            *v /= rho;
        }
        rcol[self.q.len()] = rho;
        let c = dot(&w, &self.residual);
        axpy(-c, &w, &mut self.residual);
        self.qty.push(c);
        self.q.push(w);
        self.r.push(rcol);
        self.scratch = vec![0.0; self.y.len()];
        Ok(())
    }

    fn refresh_dense(&mut self, matrix: &SensingMatrix) -> Result<()> {
        let a = matrix.submatrix(&self.indices)?;
        let sol = least_squares(&self.y, a.as_ref())?;
        self.residual = crate::linalg::residual(&self.y, a.as_ref(), &sol.coefficients);
        self.qty = sol.coefficients;
        Ok(())
    }

    /// Least-squares amplitudes for the current selection, in push order.
    pub fn coefficients(&self) -> Vec<f64> {
        if self.dependent {
            return self.qty.clone();
        }
        let m = self.q.len();
        let mut z = self.qty.clone();
        for i in (0..m).rev() {
            let mut acc = z[i];
            for k in i + 1..m {
                acc -= self.r[k][i] * z[k];
            }
            z[i] = acc / self.r[i][i];
        }
        z
    }
}
