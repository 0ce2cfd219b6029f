//! Dense vector helpers shared by the decoders.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y - A z` for a column-major dense `A`.
pub fn residual(y: &[f64], a: faer::MatRef<'_, f64>, z: &[f64]) -> Vec<f64> {
    let mut r = y.to_vec();
    for (c, &zc) in z.iter().enumerate() {
        for (i, ri) in r.iter_mut().enumerate() {
            *ri -= a[(i, c)] * zc;
        }
    }
    r
}
