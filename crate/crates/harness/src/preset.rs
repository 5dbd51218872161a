//! Experiment presets and flag resolution.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use bia_core::solvers::{relaxation_for_tau, Variant};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    GaussianNoiseless,
    GaussianNoiselessBinary,
    GaussianNoisy,
    GaussianNoisyL1,
    StudentTDenoise,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::GaussianNoiseless,
        Preset::GaussianNoiselessBinary,
        Preset::GaussianNoisy,
        Preset::GaussianNoisyL1,
        Preset::StudentTDenoise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::GaussianNoiseless => "gaussian_noiseless",
            Preset::GaussianNoiselessBinary => "gaussian_noiseless_binary",
            Preset::GaussianNoisy => "gaussian_noisy",
            Preset::GaussianNoisyL1 => "gaussian_noisy_l1",
            Preset::StudentTDenoise => "student_t_denoise",
        }
    }

    pub fn is_image(self) -> bool {
        self == Preset::StudentTDenoise
    }

    pub fn default_solvers(self) -> Vec<Variant> {
        match self {
            Preset::GaussianNoisyL1 => vec![Variant::Ia, Variant::L1Bsor],
            Preset::StudentTDenoise => vec![Variant::Ia, Variant::Bia],
            _ => vec![Variant::Sor, Variant::Bsor],
        }
    }

    /// Solver used for the long reference run that fixes `V*` and `x*`.
    pub fn reference_solver(self) -> Variant {
        match self {
            Preset::GaussianNoisyL1 => Variant::L1Bsor,
            Preset::StudentTDenoise => Variant::Bia,
            _ => Variant::Bsor,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            format!("unknown preset '{s}' (expected one of {})", names.join(", "))
        })
    }
}

/// User-facing knobs; `None` means "preset default".
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub solvers: Option<Vec<Variant>>,
    pub n: Option<usize>,
    pub sparsity: Option<f64>,
    pub binary_gt: bool,
    pub noise_level: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub tau: Option<f64>,
    pub omega: Option<f64>,
    pub iters: usize,
    pub stop_tol: f64,
    pub seed: u64,
    pub image: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(preset: Preset, seed: u64) -> Self {
        ExperimentConfig {
            preset,
            solvers: None,
            n: None,
            sparsity: None,
            binary_gt: false,
            noise_level: None,
            gamma: None,
            lambda: None,
            tau: None,
            omega: None,
            iters: 200,
            stop_tol: 0.0,
            seed,
            image: None,
        }
    }
}

/// Fully resolved parameters, as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub preset: Preset,
    pub seed: u64,
    pub solvers: Vec<String>,
    /// Problem dimension (pixel count for images).
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binary_gt: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_level: Option<f64>,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Base time step; divided by `a_ii` on quadratic presets.
    pub tau: f64,
    pub tau_schedule: &'static str,
    /// SOR relaxation, also the BLCD step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    pub iters: usize,
    pub stop_tol: f64,
    pub x0: &'static str,
}

/// Default side length of the synthetic denoising image.
pub const DEFAULT_IMAGE_SIDE: usize = 64;
pub const DEFAULT_N: usize = 256;

fn flag(msg: String) -> HarnessError {
    HarnessError::Flag(msg)
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(flag(format!("--{name} must be positive and finite, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(flag(format!("--{name} must be finite and >= 0, got {v}")))
    }
}

impl ExperimentConfig {
    /// Fills preset defaults and validates ranges. Image dimensions are left
    /// for the caller when `--image` is given.
    pub fn resolve(&self) -> Result<Params> {
        let p = self.preset;
        let solvers = self.solvers.clone().unwrap_or_else(|| p.default_solvers());
        if solvers.is_empty() {
            return Err(flag("--solvers must name at least one solver".into()));
        }
        for (k, s) in solvers.iter().enumerate() {
            if solvers[..k].contains(s) {
                return Err(flag(format!("solver {s} listed twice")));
            }
        }
        if self.iters == 0 {
            return Err(flag("--iters must be at least 1".into()));
        }
        nonnegative("stop-tol", self.stop_tol)?;
        let gamma = nonnegative("gamma", self.gamma.unwrap_or(if p.is_image() { 0.5 } else { 1.0 }))?;
        let tau = positive("tau", self.tau.unwrap_or(if p.is_image() { 1.0 } else { 2.0 }))?;

        if p.is_image() {
            for (name, set) in [
                ("sparsity", self.sparsity.is_some()),
                ("noise-level", self.noise_level.is_some()),
                ("lambda", self.lambda.is_some()),
                ("omega", self.omega.is_some()),
                ("binary-gt", self.binary_gt),
            ] {
                if set {
                    return Err(flag(format!("--{name} does not apply to {p}")));
                }
            }
            if self.image.is_some() && self.n.is_some() {
                return Err(flag("--n and --image are mutually exclusive".into()));
            }
            for s in &solvers {
                if !matches!(s, Variant::Ia | Variant::Bia | Variant::BiaModified) {
                    return Err(flag(format!("{s} needs a quadratic objective; {p} supports ia, bia, bia_modified")));
                }
            }
            let side = self.n.unwrap_or(DEFAULT_IMAGE_SIDE);
            if side < 2 {
                return Err(flag(format!("--n (image side) must be at least 2, got {side}")));
            }
            return Ok(Params {
                preset: p,
                seed: self.seed,
                solvers: solvers.iter().map(|s| s.to_string()).collect(),
                n: side * side,
                height: Some(side),
                width: Some(side),
                sparsity: None,
                binary_gt: None,
                noise_level: Some(0.1),
                gamma,
                lambda: None,
                tau,
                tau_schedule: "constant",
                omega: None,
                phi: Some(2.0),
                image: self.image.as_ref().map(|i| i.display().to_string()),
                iters: self.iters,
                stop_tol: self.stop_tol,
                x0: "noisy image",
            });
        }

        if self.image.is_some() {
            return Err(flag(format!("--image only applies to {}", Preset::StudentTDenoise)));
        }
        let n = self.n.unwrap_or(DEFAULT_N);
        if n == 0 {
            return Err(flag("--n must be at least 1".into()));
        }
        let sparsity = self.sparsity.unwrap_or(0.1);
        if !(sparsity > 0.0 && sparsity <= 1.0) {
            return Err(flag(format!("--sparsity must lie in (0, 1], got {sparsity}")));
        }
        let noisy = matches!(p, Preset::GaussianNoisy | Preset::GaussianNoisyL1);
        let noise_level = match (noisy, self.noise_level) {
            (true, v) => nonnegative("noise-level", v.unwrap_or(0.1))?,
            (false, None) => 0.0,
            (false, Some(_)) => return Err(flag(format!("--noise-level does not apply to {p}"))),
        };
        let l1 = p == Preset::GaussianNoisyL1;
        let lambda = match (l1, self.lambda) {
            (true, v) => Some(nonnegative("lambda", v.unwrap_or(100.0))?),
            (false, None) => None,
            (false, Some(_)) => return Err(flag(format!("--lambda only applies to {}", Preset::GaussianNoisyL1))),
        };
        let omega = match self.omega {
            Some(w) if !(w > 0.0 && w < 2.0) => return Err(flag(format!("--omega must lie in (0, 2), got {w}"))),
            Some(w) => w,
            None => relaxation_for_tau(tau),
        };
        for s in &solvers {
            let ok = match s {
                Variant::Sor | Variant::GaussSeidel | Variant::Bsor | Variant::Blcd => !l1,
                _ => true,
            };
            if !ok {
                return Err(flag(format!("{s} cannot handle the l1 term of {p}; use ia, bia or l1_bsor")));
            }
        }
        Ok(Params {
            preset: p,
            seed: self.seed,
            solvers: solvers.iter().map(|s| s.to_string()).collect(),
            n,
            height: None,
            width: None,
            sparsity: Some(sparsity),
            binary_gt: Some(self.binary_gt || p == Preset::GaussianNoiselessBinary),
            noise_level: Some(noise_level),
            gamma,
            lambda,
            tau,
            tau_schedule: "diag_scaled",
            omega: Some(omega),
            phi: None,
            image: None,
            iters: self.iters,
            stop_tol: self.stop_tol,
            x0: if l1 { "gaussian" } else { "zero" },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_defaults() {
        let p = ExperimentConfig::new(Preset::GaussianNoiseless, 7).resolve().unwrap();
        assert_eq!((p.n, p.gamma, p.tau, p.omega), (256, 1.0, 2.0, Some(1.0)));
        assert_eq!(p.sparsity, Some(0.1));
        assert_eq!(p.solvers, vec!["sor", "bsor"]);
        assert_eq!(p.binary_gt, Some(false));

        let p = ExperimentConfig::new(Preset::GaussianNoiselessBinary, 7).resolve().unwrap();
        assert_eq!(p.binary_gt, Some(true));

        let p = ExperimentConfig::new(Preset::GaussianNoisy, 7).resolve().unwrap();
        assert_eq!(p.noise_level, Some(0.1));

        let p = ExperimentConfig::new(Preset::GaussianNoisyL1, 7).resolve().unwrap();
        assert_eq!(p.lambda, Some(100.0));
        assert_eq!(p.x0, "gaussian");

        let p = ExperimentConfig::new(Preset::StudentTDenoise, 7).resolve().unwrap();
        assert_eq!((p.gamma, p.tau, p.phi, p.noise_level), (0.5, 1.0, Some(2.0), Some(0.1)));
        assert_eq!((p.height, p.width), (Some(64), Some(64)));
        assert_eq!(p.solvers, vec!["ia", "bia"]);
        assert_eq!(p.iters, 200);
    }

    #[test]
    fn rejects_bad_flags() {
        let base = ExperimentConfig::new(Preset::GaussianNoiseless, 1);
        let bad = [
            ExperimentConfig { sparsity: Some(0.0), ..base.clone() },
            ExperimentConfig { omega: Some(2.0), ..base.clone() },
            ExperimentConfig { tau: Some(-1.0), ..base.clone() },
            ExperimentConfig { lambda: Some(1.0), ..base.clone() },
            ExperimentConfig { noise_level: Some(0.1), ..base.clone() },
            ExperimentConfig { iters: 0, ..base.clone() },
            ExperimentConfig { solvers: Some(vec![]), ..base.clone() },
            ExperimentConfig { solvers: Some(vec![Variant::Sor, Variant::Sor]), ..base.clone() },
            ExperimentConfig { preset: Preset::GaussianNoisyL1, solvers: Some(vec![Variant::Sor]), ..base.clone() },
            ExperimentConfig { preset: Preset::StudentTDenoise, solvers: Some(vec![Variant::Bsor]), ..base.clone() },
            ExperimentConfig { image: Some("x.pgm".into()), ..base.clone() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.resolve(), Err(HarnessError::Flag(_))), "{cfg:?}");
        }
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!("nope".parse::<Preset>().is_err());
    }
}
