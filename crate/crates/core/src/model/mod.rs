//! System parameters, one-hot prefix encoding, the sensing matrix and the
//! real Gaussian multiple-access channel `y = A x̄ + n`.

mod channel;
mod sensing;

pub use channel::{add_noise, add_noise_with_variance, sample_supports, transmit, ReceivedSignal, SupportSet};
pub use sensing::{build_sensing_matrix, SensingMatrix};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest prefix length accepted. The sensing matrix keeps O(2^bp) state.
pub const MAX_PREFIX_BITS: u32 = 24;

/// Dimensional parameters of one unsourced-access setup.
///
/// `bd` and `nc` are derived: `bd = b - bp`, `nc = nt - np`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub b: u32,
    pub bp: u32,
    pub bd: u32,
    pub nt: usize,
    pub np: usize,
    pub nc: usize,
    pub ka: usize,
    /// Noise power per real sample. Always 1 for the reference setup.
    pub noise_power: f64,
}

impl Default for SystemConfig {
    /// b = 100, bp = 15, Nt = 30 000, Np = 2000, Ka = 25, N = 1.
    fn default() -> Self {
        SystemConfig::new(100, 15, 30_000, 2000, 25).expect("reference setup is consistent")
    }
}

impl SystemConfig {
    pub fn new(b: u32, bp: u32, nt: usize, np: usize, ka: usize) -> Result<Self> {
        let cfg = SystemConfig {
            b,
            bp,
            bd: b.saturating_sub(bp),
            nt,
            np,
            nc: nt.saturating_sub(np),
            ka,
            noise_power: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bp == 0 || self.bp > MAX_PREFIX_BITS {
            return Err(Error::param("bp", format!("must lie in 1..={MAX_PREFIX_BITS}, got {}", self.bp)));
        }
        if self.bp > self.b {
            return Err(Error::param("bp", format!("prefix bits {} exceed message bits {}", self.bp, self.b)));
        }
        if self.b != self.bp + self.bd {
            return Err(Error::param("bd", "b must equal bp + bd"));
        }
        if self.np == 0 {
            return Err(Error::param("np", "at least one channel use is required"));
        }
        if self.np > self.nt {
            return Err(Error::param("np", format!("Np = {} exceeds Nt = {}", self.np, self.nt)));
        }
        if self.nc != self.nt - self.np {
            return Err(Error::param("nc", "Nc must equal Nt - Np"));
        }
        if self.np > self.num_columns() {
            return Err(Error::param(
                "np",
                format!("Np = {} exceeds the 2^bp = {} rows available for subsampling", self.np, self.num_columns()),
            ));
        }
        if self.ka == 0 || self.ka > self.num_columns() {
            return Err(Error::param("ka", format!("must lie in 1..=2^bp, got {}", self.ka)));
        }
        if !(self.noise_power.is_finite() && self.noise_power >= 0.0) {
            return Err(Error::param("noise_power", "must be finite and non-negative"));
        }
        Ok(())
    }

    /// Number of columns of the sensing matrix, `2^bp`.
    pub fn num_columns(&self) -> usize {
        1usize << self.bp
    }

    pub fn with_np(&self, np: usize) -> Result<Self> {
        let mut cfg = *self;
        cfg.np = np;
        cfg.nc = self.nt.saturating_sub(np);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_ka(&self, ka: usize) -> Result<Self> {
        let mut cfg = *self;
        cfg.ka = ka;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Maps a `bp`-bit prefix (most significant bit first) to its integer index
/// and the one-hot vector of length `2^bp` with a single 1 at that index.
pub fn encode_message(bits: &[bool], bp: u32) -> Result<(usize, Vec<u8>)> {
    if bp == 0 || bp > MAX_PREFIX_BITS {
        return Err(Error::param("bp", format!("must lie in 1..={MAX_PREFIX_BITS}")));
    }
    if bits.len() != bp as usize {
        return Err(Error::Dimension(format!(
            "expected {bp} prefix bits, got {}",
            bits.len()
        )));
    }
    let index = bits.iter().fold(0usize, |acc, &bit| (acc << 1) | usize::from(bit));
    let mut one_hot = vec![0u8; 1usize << bp];
    one_hot[index] = 1;
    Ok((index, one_hot))
}
