//! Energy split between the compressed-sensing phase and the data phase.
//!
//! With `Ep = P1 Ts Np`, `Ed = P2 Ts Nc` and `alpha = Ep / Ed`, the energy per
//! information bit over the noise density is
//! `Eb/N0 = (P1 Np + P2 Nc) / (2b) = P1 (alpha Np + Np) / (2 alpha b)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyConfig {
    pub p1: f64,
    pub p2: f64,
    pub alpha: f64,
    pub ts: f64,
    pub ep: f64,
    pub ed: f64,
}

impl EnergyConfig {
    /// Derives `P2` from `P1` and the target ratio `alpha`.
    pub fn from_alpha(p1: f64, alpha: f64, np: usize, nc: usize, ts: f64) -> Result<Self> {
        positive("p1", p1)?;
        positive("alpha", alpha)?;
        positive("ts", ts)?;
        if np == 0 || nc == 0 {
            return Err(Error::param("nc", "both phases need at least one channel use"));
        }
        let p2 = p1 * np as f64 / (alpha * nc as f64);
        Self::from_powers(p1, p2, np, nc, ts)
    }

    pub fn from_powers(p1: f64, p2: f64, np: usize, nc: usize, ts: f64) -> Result<Self> {
        positive("p1", p1)?;
        positive("p2", p2)?;
        positive("ts", ts)?;
        if np == 0 || nc == 0 {
            return Err(Error::param("nc", "both phases need at least one channel use"));
        }
        let ep = p1 * ts * np as f64;
        let ed = p2 * ts * nc as f64;
        Ok(EnergyConfig {
            p1,
            p2,
            alpha: ep / ed,
            ts,
            ep,
            ed,
        })
    }

    /// `(P1 Np + P2 Nc) / (2b)`, the left-hand form.
    pub fn eb_n0(&self, b: u32) -> f64 {
        (self.ep + self.ed) / self.ts / (2.0 * b as f64)
    }
}

/// `Eb/N0 = P1 (alpha Np + Np) / (2 alpha b)` (linear).
pub fn eb_n0(p1: f64, np: usize, alpha: f64, b: u32) -> Result<f64> {
    positive("p1", p1)?;
    positive("alpha", alpha)?;
    if np == 0 {
        return Err(Error::param("np", "must be positive"));
    }
    if b == 0 {
        return Err(Error::param("b", "must be positive"));
    }
    let np = np as f64;
    Ok(p1 * (alpha * np + np) / (2.0 * alpha * b as f64))
}

/// Per-symbol CS power that spends an `Eb/N0` budget (in dB, reduced by
/// `backoff_db`) with energy ratio `alpha`:
/// `P1 = (Eb/N0) 2 alpha b / ((alpha + 1) Np)`.
pub fn p1_from_budget(ebn0_db: f64, np: usize, alpha: f64, b: u32, backoff_db: f64) -> Result<f64> {
    if !ebn0_db.is_finite() {
        return Err(Error::param("ebn0_db", "must be finite"));
    }
    if !backoff_db.is_finite() {
        return Err(Error::param("backoff_db", "must be finite"));
    }
    positive("alpha", alpha)?;
    if np == 0 {
        return Err(Error::param("np", "must be positive"));
    }
    if b == 0 {
        return Err(Error::param("b", "must be positive"));
    }
    let budget = db_to_linear(ebn0_db - backoff_db);
    Ok(budget * 2.0 * alpha * b as f64 / ((alpha + 1.0) * np as f64))
}

/// The three reference powers drawn against the minimum-power curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLines {
    /// alpha = 1, no backoff.
    pub alpha1_dbw: f64,
    /// alpha = 1 with a 1 dB backoff from the bound.
    pub alpha1_backoff_dbw: f64,
    /// alpha = 1.5, no backoff.
    pub alpha1p5_dbw: f64,
}

pub const REFERENCE_BACKOFF_DB: f64 = 1.0;
pub const REFERENCE_HIGH_ALPHA: f64 = 1.5;

/// Largest P1 the CS phase may use for the given bound value.
pub fn reference_power_line(ebn0_db: f64, np: usize, b: u32) -> Result<ReferenceLines> {
    Ok(ReferenceLines {
        alpha1_dbw: linear_to_db(p1_from_budget(ebn0_db, np, 1.0, b, 0.0)?),
        alpha1_backoff_dbw: linear_to_db(p1_from_budget(ebn0_db, np, 1.0, b, REFERENCE_BACKOFF_DB)?),
        alpha1p5_dbw: linear_to_db(p1_from_budget(ebn0_db, np, REFERENCE_HIGH_ALPHA, b, 0.0)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_energy_reference_point() {
        let v = eb_n0(0.05, 2000, 1.0, 100).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert!(linear_to_db(v).abs() < 1e-12);
    }

    #[test]
    fn large_alpha_limit() {
        let v = eb_n0(0.05, 2000, 1e12, 100).unwrap();
        assert!((v - 0.05 * 2000.0 / 200.0).abs() < 1e-9);
    }

    #[test]
    fn two_forms_agree() {
        let e = EnergyConfig::from_alpha(0.07, 1.3, 1500, 28_500, 1e-6).unwrap();
        let right = eb_n0(0.07, 1500, 1.3, 100).unwrap();
        assert!((e.eb_n0(100) - right).abs() <= 1e-12 * right);
        assert!((e.alpha - 1.3).abs() < 1e-12);
    }

    #[test]
    fn budget_inverts_eb_n0() {
        let v = eb_n0(0.031, 1750, 0.8, 100).unwrap();
        let p1 = p1_from_budget(linear_to_db(v), 1750, 0.8, 100, 0.0).unwrap();
        assert!((p1 - 0.031).abs() <= 1e-12 * 0.031);
        // alpha = 1, no backoff: (Eb/N0) b / Np
        let p1 = p1_from_budget(0.0, 2000, 1.0, 100, 0.0).unwrap();
        assert!((p1 - 0.05).abs() < 1e-15);
    }

    #[test]
    fn backoff_and_alpha_ratios() {
        let base = p1_from_budget(0.7, 2000, 1.0, 100, 0.0).unwrap();
        let backed = p1_from_budget(0.7, 2000, 1.0, 100, 1.0).unwrap();
        assert!((backed / base - 10f64.powf(-0.1)).abs() < 1e-12);
        let high = p1_from_budget(0.7, 2000, 1.5, 100, 0.0).unwrap();
        assert!((high / base - 1.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_arguments() {
        assert!(eb_n0(0.0, 10, 1.0, 100).is_err());
        assert!(eb_n0(1.0, 0, 1.0, 100).is_err());
        assert!(eb_n0(1.0, 10, -1.0, 100).is_err());
        assert!(eb_n0(1.0, 10, 1.0, 0).is_err());
        assert!(p1_from_budget(0.0, 10, 0.0, 100, 0.0).is_err());
        assert!(p1_from_budget(f64::NAN, 10, 1.0, 100, 0.0).is_err());
    }

    #[test]
    fn energy_split_conserves_budget() {
        let e = EnergyConfig::from_alpha(0.04, 1.0, 2000, 28_000, 1.0).unwrap();
        let budget = eb_n0(0.04, 2000, 1.0, 100).unwrap();
        assert!(((e.ep + e.ed) - budget * 2.0 * 100.0).abs() <= 1e-12 * (e.ep + e.ed));
    }

    #[test]
    fn reference_lines_ordering() {
        let r = reference_power_line(0.5, 2000, 100).unwrap();
        assert!((r.alpha1_dbw - (0.5 - 13.010_299_956_639_813)).abs() < 1e-9);
        assert!((r.alpha1_dbw - r.alpha1_backoff_dbw - 1.0).abs() < 1e-12);
        assert!((r.alpha1p5_dbw - r.alpha1_dbw - linear_to_db(1.2)).abs() < 1e-12);
    }
}
