use rand::seq::index;
use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SensingMatrix;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Active column indices of one channel realization, kept sorted.
///
/// With `allow_duplicates` the indices form a multiset and a repeated index
/// contributes its column once per occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSet {
    indices: Vec<usize>,
    allow_duplicates: bool,
}

impl SupportSet {
    pub fn new(mut indices: Vec<usize>, allow_duplicates: bool) -> Result<Self> {
        indices.sort_unstable();
        if !allow_duplicates && indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Contract("duplicate support index with duplicates disallowed".into()));
        }
        Ok(SupportSet {
            indices,
            allow_duplicates,
        })
    }

    pub fn empty() -> Self {
        SupportSet {
            indices: Vec::new(),
            allow_duplicates: false,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn allow_duplicates(&self) -> bool {
        self.allow_duplicates
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// Distinct indices, ascending.
    pub fn distinct(&self) -> Vec<usize> {
        let mut d = self.indices.clone();
        d.dedup();
        d
    }
}

/// Received samples `y`, one per channel use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceivedSignal {
    pub samples: Vec<f64>,
}

impl ReceivedSignal {
    pub fn new(samples: Vec<f64>) -> Self {
        ReceivedSignal { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.samples)
    }
}

/// Draws `ka` message indices uniformly from `[0, 2^bp)`.
pub fn sample_supports(ka: usize, bp: u32, seed: u64, allow_duplicates: bool) -> Result<SupportSet> {
    if bp == 0 || bp > super::MAX_PREFIX_BITS {
        return Err(Error::param("bp", format!("must lie in 1..={}", super::MAX_PREFIX_BITS)));
    }
    let n = 1usize << bp;
    let mut rng = rng_from_seed(seed);
    let indices = if allow_duplicates {
        (0..ka).map(|_| rng.random_range(0..n)).collect()
    } else {
        if ka > n {
            return Err(Error::Infeasible(format!(
                "{ka} distinct messages do not fit in {n} columns"
            )));
        }
        index::sample(&mut rng, n, ka).into_vec()
    };
    SupportSet::new(indices, allow_duplicates)
}

/// Noiseless superposition `A x̄`: the sum of the support's columns.
pub fn transmit(matrix: &SensingMatrix, supports: &SupportSet) -> Result<Vec<f64>> {
    let terms: Vec<(usize, f64)> = supports.indices().iter().map(|&j| (j, 1.0)).collect();
    matrix.apply_sparse(&terms)
}

/// Adds i.i.d. `N(0, 1)` noise.
pub fn add_noise(signal: &[f64], seed: u64) -> ReceivedSignal {
    add_noise_with_variance(signal, 1.0, seed)
}

/// Adds i.i.d. `N(0, variance)` noise. A zero variance returns the input.
pub fn add_noise_with_variance(signal: &[f64], variance: f64, seed: u64) -> ReceivedSignal {
    if variance == 0.0 {
        return ReceivedSignal::new(signal.to_vec());
    }
    let sigma = variance.sqrt();
    let mut rng = rng_from_seed(seed);
    let samples = signal
        .iter()
        .map(|&s| {
            let z: f64 = StandardNormal.sample(&mut rng);
            s + sigma * z
        })
        .collect();
    ReceivedSignal::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_sensing_matrix;

    #[test]
    fn single_user_range() {
        for seed in 0..50 {
            let s = sample_supports(1, 4, seed, false).unwrap();
            assert_eq!(s.len(), 1);
            assert!(s.indices()[0] < 16);
        }
    }

    #[test]
    fn pigeonhole_fills_every_column() {
        let s = sample_supports(16, 4, 3, false).unwrap();
        assert_eq!(s.indices(), (0..16).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn supports_are_reproducible_and_distinct() {
        let a = sample_supports(50, 15, 1234, false).unwrap();
        let b = sample_supports(50, 15, 1234, false).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.distinct().len(), 50);
    }

    #[test]
    fn too_many_distinct_users_is_infeasible() {
        assert!(matches!(sample_supports(17, 4, 0, false), Err(Error::Infeasible(_))));
        assert_eq!(sample_supports(17, 4, 0, true).unwrap().len(), 17);
    }

    #[test]
    fn transmit_sums_columns() {
        let a = build_sensing_matrix(6, 20, 0.5, 2).unwrap();
        let single = transmit(&a, &SupportSet::new(vec![9], false).unwrap()).unwrap();
        assert_eq!(single, a.column(9).unwrap());

        let pair = transmit(&a, &SupportSet::new(vec![3, 40], false).unwrap()).unwrap();
        let (c3, c40) = (a.column(3).unwrap(), a.column(40).unwrap());
        for i in 0..20 {
            assert!((pair[i] - (c3[i] + c40[i])).abs() < 1e-15);
        }

        let none = transmit(&a, &SupportSet::empty()).unwrap();
        assert!(none.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn transmit_counts_duplicates() {
        let a = build_sensing_matrix(4, 8, 1.0, 2).unwrap();
        let twice = transmit(&a, &SupportSet::new(vec![5, 5], true).unwrap()).unwrap();
        let c = a.column(5).unwrap();
        for i in 0..8 {
            assert!((twice[i] - 2.0 * c[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn transmit_rejects_out_of_range() {
        let a = build_sensing_matrix(4, 8, 1.0, 2).unwrap();
        let bad = SupportSet::new(vec![16], false).unwrap();
        assert!(matches!(transmit(&a, &bad), Err(Error::Dimension(_))));
    }

    #[test]
    fn noise_moments() {
        let n = 1_000_000;
        let y = add_noise(&vec![0.0; n], 77);
        let mean = y.samples.iter().sum::<f64>() / n as f64;
        let var = y.samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4e-3, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn noise_is_reproducible_and_zero_variance_is_identity() {
        let x = vec![1.0, -2.0, 3.5];
        assert_eq!(add_noise(&x, 5), add_noise(&x, 5));
        assert_ne!(add_noise(&x, 5), add_noise(&x, 6));
        assert_eq!(add_noise_with_variance(&x, 0.0, 5).samples, x);
    }
}
