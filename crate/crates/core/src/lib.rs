//! Simulation of the compressed-sensing phase of unsourced multiple access.
//!
//! Users map a `bp`-bit message prefix to a column of a shared sensing matrix
//! (a row-subsampled DCT), all active users transmit simultaneously over a
//! real Gaussian multiple-access channel, and the receiver recovers the set
//! of transmitted columns with a greedy sparse-recovery decoder.
//!
//! * [`model`]: system parameters, encoding, sensing matrix, channel.
//! * [`recovery`]: OMP, gOMP, CoSaMP, SP and sparsity-agnostic decoding.
//! * [`metrics`]: detection and false-alarm statistics, ROC sweeps.
//! * [`experiments`]: minimum-power, minimum-`Np` and ROC Monte Carlo runs.
//! * [`cli`]: argument handling for the `umacs` binary.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod recovery;
pub mod rng;

pub use error::{Error, Result};
