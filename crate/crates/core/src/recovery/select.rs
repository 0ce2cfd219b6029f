use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::SensingMatrix;

/// The `count` columns outside `excluded` with the largest `|<residual, a_j>|`,
/// strongest first; equal magnitudes go to the smaller index.
pub fn correlate_select(
    residual: &[f64],
    matrix: &SensingMatrix,
    excluded: &[usize],
    count: usize,
) -> Result<Vec<usize>> {
    let mut mask = vec![false; matrix.num_columns()];
    for &j in excluded {
        matrix.check_column(j)?;
        mask[j] = true;
    }
    let corr = matrix.correlate(residual)?;
    top_by_magnitude(&corr, &mask, count)
}

fn by_strength(corr: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| corr[b].abs().total_cmp(&corr[a].abs()).then(a.cmp(&b))
}

/// Top-`count` selection over a correlation vector with an exclusion mask.
pub(crate) fn top_by_magnitude(corr: &[f64], excluded: &[bool], count: usize) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::param("count", "must be at least 1"));
    }
    let mut pool: Vec<usize> = (0..corr.len()).filter(|&j| !excluded[j]).collect();
    if count > pool.len() {
        return Err(Error::Infeasible(format!(
            "asked for {count} columns, only {} are not excluded",
            pool.len()
        )));
    }
    let cmp = by_strength(corr);
    if count < pool.len() {
        pool.select_nth_unstable_by(count - 1, &cmp);
        pool.truncate(count);
    }
    pool.sort_unstable_by(&cmp);
    Ok(pool)
}
