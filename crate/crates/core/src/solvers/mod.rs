//! Sweep-based schemes and the outer run loop.

mod run;
mod sweeps;

pub use run::{run, run_with, RunOutput};
pub use sweeps::{
    bia_sweep, blcd_sweep, bsor_sweep, ia_sweep, l1_bsor_sweep, l1_bsor_coordinate, sor_sweep, L1BsorCase,
    L1BsorUpdate, SweepResult,
};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Successive over-relaxation with relaxation `omega`.
    Sor,
    /// SOR with `omega = 1`.
    GaussSeidel,
    /// Itoh-Abe discrete gradient (Euclidean `J`).
    Ia,
    /// Bregman Itoh-Abe keeping the box normal-cone part of `p`.
    Bia,
    /// Bregman Itoh-Abe that forgets the normal-cone part of `p`.
    BiaModified,
    /// Closed-form Bregman SOR for quadratics and elastic-net `J`.
    Bsor,
    /// Closed-form Bregman SOR for l1-regularised quadratics.
    L1Bsor,
    /// Bregman linearised coordinate descent.
    Blcd,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Sor,
        Variant::GaussSeidel,
        Variant::Ia,
        Variant::Bia,
        Variant::BiaModified,
        Variant::Bsor,
        Variant::L1Bsor,
        Variant::Blcd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Sor => "sor",
            Variant::GaussSeidel => "gauss_seidel",
            Variant::Ia => "ia",
            Variant::Bia => "bia",
            Variant::BiaModified => "bia_modified",
            Variant::Bsor => "bsor",
            Variant::L1Bsor => "l1_bsor",
            Variant::Blcd => "blcd",
        }
    }

    /// Whether the scheme uses a non-Euclidean Bregman function.
    pub fn is_bregman(self) -> bool {
        matches!(self, Variant::Bia | Variant::BiaModified | Variant::Bsor | Variant::L1Bsor | Variant::Blcd)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown solver variant '{s}'")))
    }
}

/// Per-coordinate time steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauSchedule {
    /// `tau_i = tau`.
    Constant,
    /// `tau_i = tau / a_ii` for quadratic objectives.
    DiagScaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Base time step `tau` for the discrete-gradient variants, relaxation
    /// `omega` in (0, 2) for SOR, step `alpha` in (0, 2) for BLCD. Unused by
    /// Gauss-Seidel.
    pub step: f64,
    pub schedule: TauSchedule,
    pub max_iters: usize,
    /// Stop after three consecutive sweeps in which both `||x^{k+1} - x^k||`
    /// and `||p^{k+1} - p^k||` are at most `stop_tol`.
    pub stop_tol: f64,
}

impl SolverConfig {
    pub fn new(variant: Variant, step: f64) -> Self {
        let schedule = match variant {
            Variant::Ia | Variant::Bia | Variant::BiaModified => TauSchedule::Constant,
            _ => TauSchedule::DiagScaled,
        };
        SolverConfig { variant, step, schedule, max_iters: 200, stop_tol: 0.0 }
    }

    pub fn with_schedule(mut self, schedule: TauSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_stop_tol(mut self, stop_tol: f64) -> Self {
        self.stop_tol = stop_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.step;
        match self.variant {
            Variant::GaussSeidel => {}
            Variant::Sor | Variant::Blcd => {
                if !(s > 0.0 && s < 2.0) {
                    return Err(Error::Config(format!("{} needs a step in (0, 2), got {s}", self.variant)));
                }
            }
            _ => {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::Config(format!("{} needs a positive finite time step, got {s}", self.variant)));
                }
            }
        }
        if matches!(self.variant, Variant::Bsor | Variant::L1Bsor) && self.schedule != TauSchedule::DiagScaled {
            return Err(Error::Config(format!("{} is defined for diagonally scaled time steps", self.variant)));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::Config(format!("stop tolerance must be >= 0, got {}", self.stop_tol)));
        }
        Ok(())
    }
}

/// `tau_i = 2 omega / ((2 - omega) a_ii)`: the Itoh-Abe time step that
/// reproduces SOR with relaxation `omega`.
pub fn sor_equivalent_tau(omega: f64, a_ii: f64) -> f64 {
    2.0 * omega / ((2.0 - omega) * a_ii)
}

/// Relaxation `omega = 2 tau / (2 + tau)` for a diagonally scaled base step `tau`.
pub fn relaxation_for_tau(tau: f64) -> f64 {
    2.0 * tau / (2.0 + tau)
}

/// Sparsity weight for BLCD with step `alpha` that reproduces Bregman
/// Itoh-Abe with weight `gamma`: `gamma / (1 + alpha / (2 - alpha))`.
pub fn blcd_equivalent_gamma(gamma: f64, alpha: f64) -> f64 {
    gamma / (1.0 + alpha / (2.0 - alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("nope".parse::<Variant>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(Variant::Sor, 1.5).validate().is_ok());
        assert!(SolverConfig::new(Variant::Sor, 2.0).validate().is_err());
        assert!(SolverConfig::new(Variant::Blcd, 0.0).validate().is_err());
        assert!(SolverConfig::new(Variant::Bia, -1.0).validate().is_err());
        assert!(SolverConfig::new(Variant::GaussSeidel, f64::NAN).validate().is_ok());
        let bad = SolverConfig::new(Variant::Bsor, 2.0).with_schedule(TauSchedule::Constant);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn parameter_maps() {
        assert_eq!(relaxation_for_tau(2.0), 1.0);
        assert_eq!(sor_equivalent_tau(1.0, 4.0), 0.5);
        assert_eq!(blcd_equivalent_gamma(1.0, 1.0), 0.5);
    }
}
