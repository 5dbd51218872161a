//! Outer loop: repeated sweeps, stopping rule and per-sweep tracing.

use std::time::Instant;

use crate::bregman::{BregmanKind, BregmanSpec, PrimalDualState};
use crate::error::{check_len, Error, Result};
use crate::inclusion::{BoxMode, InclusionOptions};
use crate::metrics::{clarke_dist_from_intervals, relative_objective, support_stats, Reference, TraceRecord};
use crate::objectives::{CoordinateObjective, QuadraticObjective, QuadraticParts, Residual};

use super::sweeps::{bia_pass, blcd_pass, bsor_pass, l1_bsor_pass, sor_pass, step_sq};
use super::{sor_equivalent_tau, SolverConfig, TauSchedule, Variant};

/// Consecutive small steps required by the stopping rule.
const STOP_STREAK: usize = 3;

/// Allowed objective increase per sweep, relative to `max(1, |V|)`.
const MONOTONE_TOL: f64 = 1e-9;

/// The closed-form sweeps update the residual in place; it is recomputed from
/// scratch every this many sweeps to bound rounding drift.
const RESIDUAL_REFRESH: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub state: PrimalDualState,
    /// `V(x^0)`.
    pub initial_value: f64,
    pub trace: Vec<TraceRecord>,
}

/// What one sweep of the configured variant does.
enum Plan<'a> {
    Sor { q: &'a QuadraticObjective, omega: f64 },
    Bia { taus: Vec<f64>, mode: BoxMode },
    Bsor { q: &'a QuadraticObjective, gamma: f64, lambda: f64, tau: f64 },
    Blcd { q: &'a QuadraticObjective, gamma: f64, alpha: f64 },
}

impl<'a> Plan<'a> {
    fn parts(&self) -> Option<QuadraticParts<'a>> {
        match *self {
            Plan::Sor { q, .. } | Plan::Blcd { q, .. } => Some(QuadraticParts { quadratic: q, lambda: 0.0 }),
            Plan::Bsor { q, lambda, .. } => Some(QuadraticParts { quadratic: q, lambda }),
            Plan::Bia { .. } => None,
        }
    }
}

fn is_euclidean(spec: &BregmanSpec) -> bool {
    spec.per_coordinate
        .iter()
        .all(|j| j.kind == BregmanKind::Euclidean || j.gamma == 0.0)
}

fn plan<'a, V: CoordinateObjective>(v: &'a V, spec: &BregmanSpec, cfg: &SolverConfig) -> Result<(Plan<'a>, f64)> {
    let n = v.dim();
    let quad = || {
        v.quadratic_parts()
            .ok_or_else(|| Error::Config(format!("{} needs a quadratic objective", cfg.variant)))
    };
    let diag = |q: &QuadraticObjective| -> Result<Vec<f64>> {
        q.check_diagonal()?;
        Ok((0..n).map(|i| q.diag(i)).collect())
    };
    let max_of = |it: Vec<f64>| it.into_iter().fold(0.0f64, f64::max);

    match cfg.variant {
        Variant::Sor | Variant::GaussSeidel => {
            let parts = quad()?;
            if parts.lambda != 0.0 {
                return Err(Error::Config(format!("{} solves the unregularised quadratic only", cfg.variant)));
            }
            if !is_euclidean(spec) || spec.per_coordinate.iter().any(|j| j.has_box()) {
                return Err(Error::Config(format!("{} runs in the unconstrained Euclidean geometry", cfg.variant)));
            }
            let omega = if cfg.variant == Variant::GaussSeidel { 1.0 } else { cfg.step };
            let d = diag(parts.quadratic)?;
            let tau_max = max_of(d.iter().map(|&a| sor_equivalent_tau(omega, a)).collect());
            Ok((Plan::Sor { q: parts.quadratic, omega }, tau_max))
        }
        Variant::Ia | Variant::Bia | Variant::BiaModified => {
            if cfg.variant == Variant::Ia && !is_euclidean(spec) {
                return Err(Error::Config("ia needs a Euclidean Bregman function".into()));
            }
            let taus = match cfg.schedule {
                TauSchedule::Constant => vec![cfg.step; n],
                TauSchedule::DiagScaled => diag(quad()?.quadratic)?.iter().map(|a| cfg.step / a).collect(),
            };
            let tau_max = max_of(taus.clone());
            let mode = if cfg.variant == Variant::BiaModified { BoxMode::ForgetBox } else { BoxMode::KeepBox };
            Ok((Plan::Bia { taus, mode }, tau_max))
        }
        Variant::Bsor | Variant::L1Bsor | Variant::Blcd => {
            let parts = quad()?;
            let gamma = spec.uniform_elastic_gamma().ok_or_else(|| {
                Error::Config(format!("{} needs J = 1/2 |x|^2 + gamma |x|_1 without constraints", cfg.variant))
            })?;
            let d = diag(parts.quadratic)?;
            if cfg.variant == Variant::Blcd {
                if parts.lambda != 0.0 {
                    return Err(Error::Config("blcd solves the unregularised quadratic only".into()));
                }
                let alpha = cfg.step;
                let tau_max = max_of(d.iter().map(|&a| sor_equivalent_tau(alpha, a)).collect());
                return Ok((Plan::Blcd { q: parts.quadratic, gamma, alpha }, tau_max));
            }
            if cfg.variant == Variant::Bsor && parts.lambda != 0.0 {
                return Err(Error::Config("bsor has no l1 term; use l1_bsor".into()));
            }
            let tau_max = max_of(d.iter().map(|a| cfg.step / a).collect());
            Ok((Plan::Bsor { q: parts.quadratic, gamma, lambda: parts.lambda, tau: cfg.step }, tau_max))
        }
    }
}

/// Runs `cfg` from `x0` with `p0` from [`BregmanSpec::initial_subgradient`].
pub fn run<V: CoordinateObjective>(
    v: &V,
    spec: &BregmanSpec,
    x0: Vec<f64>,
    cfg: &SolverConfig,
    reference: Option<&Reference>,
) -> Result<RunOutput> {
    run_with(v, spec, x0, cfg, reference, |_| {})
}

/// As [`run`], handing every record to `sink` as soon as it is produced.
pub fn run_with<V, S>(
    v: &V,
    spec: &BregmanSpec,
    x0: Vec<f64>,
    cfg: &SolverConfig,
    reference: Option<&Reference>,
    mut sink: S,
) -> Result<RunOutput>
where
    V: CoordinateObjective,
    S: FnMut(&TraceRecord),
{
    cfg.validate()?;
    let n = v.dim();
    check_len(n, spec.n())?;
    check_len(n, x0.len())?;
    if let Some(Reference { xstar: Some(xs), .. }) = reference {
        check_len(n, xs.len())?;
    }
    let (plan, tau_max) = plan(v, spec, cfg)?;
    let mut state = PrimalDualState::initial(spec, x0)?;
    if matches!(plan, Plan::Sor { .. }) {
        // p = x is the Euclidean subgradient
        state.p.clone_from(&state.x);
    }

    let start = Instant::now();
    let opts = InclusionOptions::default();
    let mut cache = v.init_cache(&state.x);
    let initial_value = v.value_cached(&cache, &state.x);
    if !initial_value.is_finite() {
        return Err(Error::InvariantViolation(format!("V(x0) = {initial_value}")));
    }
    let mut value = initial_value;
    let mut trace = Vec::with_capacity(cfg.max_iters.min(4096));
    let mut streak = 0;
    let parts = plan.parts();
    let mut resid = parts.map(|p| Residual(p.quadratic.residual(&state.x)));

    for iter in 1..=cfg.max_iters {
        let before = state.x.clone();
        let before_p = state.p.clone();
        if let (Some(r), Some(p)) = (resid.as_mut(), parts) {
            if iter % RESIDUAL_REFRESH == 0 {
                r.0 = p.quadratic.residual(&state.x);
            }
        }
        match (&plan, resid.as_mut()) {
            (Plan::Sor { q, omega }, Some(r)) => {
                sor_pass(q, &mut r.0, &mut state.x, *omega);
                state.p.clone_from(&state.x);
            }
            (Plan::Bsor { q, gamma, lambda, tau }, Some(r)) => {
                l1_bsor_or_bsor(q, &mut r.0, &mut state, *gamma, *lambda, *tau)?;
            }
            (Plan::Blcd { q, gamma, alpha }, Some(r)) => blcd_pass(q, &mut r.0, &mut state, *gamma, *alpha),
            (Plan::Bia { taus, mode }, _) => bia_pass(v, spec, &mut cache, &mut state, taus, *mode, &opts)?,
            _ => unreachable!("quadratic plans carry a residual"),
        }
        state.k += 1;

        let (next_value, intervals): (f64, Vec<_>) = match (&resid, parts) {
            (Some(r), Some(p)) => {
                (p.value_cached(r, &state.x), (0..n).map(|i| p.clarke_interval(r, &state.x, i)).collect())
            }
            _ => {
                // fresh cache: the running one accumulates rounding over many sweeps
                cache = v.init_cache(&state.x);
                let value = v.value_cached(&cache, &state.x);
                (value, (0..n).map(|i| v.coord_clarke_interval(&cache, &state.x, i)).collect())
            }
        };
        let decrease = value - next_value;
        let tol = MONOTONE_TOL * value.abs().max(1.0);
        if !(decrease >= -tol) {
            return Err(Error::InvariantViolation(format!(
                "{} increased the objective at sweep {iter}: {value:e} -> {next_value:e}",
                cfg.variant
            )));
        }
        let sq = step_sq(&before, &state.x);

        let (rel_objective, support_match, support_error) = match reference {
            Some(r) => {
                let rel = relative_objective(next_value, initial_value, r.vstar)?;
                let (m, e) = match &r.xstar {
                    Some(xs) => support_stats(&state.x, xs)?,
                    None => (f64::NAN, f64::NAN),
                };
                (rel, m, e)
            }
            None => (f64::NAN, f64::NAN, f64::NAN),
        };

        let record = TraceRecord {
            iter,
            objective: next_value,
            rel_objective,
            support_match,
            support_error,
            grad_dist: clarke_dist_from_intervals(&intervals),
            step_norm: sq.sqrt(),
            dissipation_slack: decrease - spec.mu / tau_max * sq,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        sink(&record);
        trace.push(record);
        value = next_value;

        // x can rest on a plateau while p drifts towards dJ's boundary
        let moved_sq = sq.max(step_sq(&before_p, &state.p));
        if moved_sq <= cfg.stop_tol * cfg.stop_tol {
            streak += 1;
            if streak >= STOP_STREAK {
                break;
            }
        } else {
            streak = 0;
        }
    }

    Ok(RunOutput { state, initial_value, trace })
}

fn l1_bsor_or_bsor(
    q: &QuadraticObjective,
    r: &mut [f64],
    state: &mut PrimalDualState,
    gamma: f64,
    lambda: f64,
    tau: f64,
) -> Result<()> {
    if lambda == 0.0 {
        bsor_pass(q, r, state, gamma, tau);
        Ok(())
    } else {
        l1_bsor_pass(q, r, state, gamma, lambda, tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{gaussian_system, L1QuadraticObjective, StudentTObjective};

    fn spd16() -> QuadraticObjective {
        let s = gaussian_system(16, 0.25, false, 3).unwrap();
        // well conditioned: shift the spectrum
        let mut a = s.problem.matrix().to_vec();
        for i in 0..16 {
            a[i * 16 + i] += 16.0;
        }
        QuadraticObjective::new(16, a, (0..16).map(|i| i as f64 - 7.5).collect()).unwrap()
    }

    fn solve_dense(q: &QuadraticObjective) -> Vec<f64> {
        // Gaussian elimination with partial pivoting
        let n = q.n();
        let mut m: Vec<Vec<f64>> = (0..n).map(|i| {
            let mut row = q.row(i).to_vec();
            row.push(q.rhs()[i]);
            row
        }).collect();
        for c in 0..n {
            let piv = (c..n).max_by(|a, b| m[*a][c].abs().total_cmp(&m[*b][c].abs())).unwrap();
            m.swap(c, piv);
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
            x[r] = (m[r][n] - s) / m[r][r];
        }
        x
    }

    #[test]
    fn sor_converges_to_direct_solution() {
        let q = spd16();
        let xs = solve_dense(&q);
        let spec = BregmanSpec::euclidean(16);
        for omega in [0.7, 1.0, 1.4] {
            let cfg = SolverConfig::new(Variant::Sor, omega).with_max_iters(500).with_stop_tol(1e-14);
            let out = run(&q, &spec, vec![0.0; 16], &cfg, None).unwrap();
            let gap = out.state.x.iter().zip(&xs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(gap < 1e-6, "omega {omega}: {gap}");
            assert!(out.trace.len() < 500);
        }
    }

    #[test]
    fn huge_stop_tol_returns_after_three_sweeps() {
        let q = spd16();
        let cfg = SolverConfig::new(Variant::GaussSeidel, 1.0).with_stop_tol(1e9);
        let out = run(&q, &BregmanSpec::euclidean(16), vec![0.0; 16], &cfg, None).unwrap();
        assert_eq!(out.trace.len(), 3);
        assert_eq!(out.state.k, 3);
    }

    #[test]
    fn stop_rule_waits_out_subgradient_plateaus() {
        // x stays at 0 for four sweeps while p climbs by 0.2 towards gamma = 1
        let q = QuadraticObjective::from_rows(&[vec![1.0]], vec![0.1]).unwrap();
        let spec = BregmanSpec::elastic_net(1, 1.0).unwrap();
        let cfg = SolverConfig::new(Variant::Bsor, 2.0).with_max_iters(500).with_stop_tol(1e-12);
        let out = run(&q, &spec, vec![0.0], &cfg, None).unwrap();
        assert!(out.trace[..4].iter().all(|r| r.step_norm == 0.0));
        assert!(out.trace.len() > 5);
        assert!((out.state.x[0] - 0.1).abs() < 1e-10, "{:?}", out.state);
    }

    #[test]
    fn carried_residual_matches_direct_evaluation() {
        let q = spd16();
        let l1 = L1QuadraticObjective::new(q.clone(), 0.5).unwrap();
        let en = BregmanSpec::elastic_net(16, 1.0).unwrap();
        let x0 = vec![0.5; 16];
        let iters = 3 * RESIDUAL_REFRESH + 5;
        let cfg = SolverConfig::new(Variant::L1Bsor, 2.0).with_max_iters(iters);
        let out = run(&l1, &en, x0.clone(), &cfg, None).unwrap();
        let last = out.trace.last().unwrap();
        assert!((last.objective - l1.value(&out.state.x)).abs() <= 1e-12 * last.objective.abs().max(1.0));
        assert!((last.grad_dist - crate::metrics::clarke_dist(&l1, &out.state.x)).abs() <= 1e-12);

        let cfg = SolverConfig::new(Variant::Sor, 1.2).with_max_iters(iters);
        let out = run(&q, &BregmanSpec::euclidean(16), x0, &cfg, None).unwrap();
        let last = out.trace.last().unwrap();
        assert!((last.objective - q.value(&out.state.x)).abs() <= 1e-12 * last.objective.abs().max(1.0));
    }

    #[test]
    fn traces_are_monotone_and_dissipative() {
        let q = spd16();
        let l1 = L1QuadraticObjective::new(q.clone(), 0.5).unwrap();
        let en = BregmanSpec::elastic_net(16, 1.0).unwrap();
        let eu = BregmanSpec::euclidean(16);
        let x0 = vec![0.5; 16];
        let check = |trace: &[TraceRecord], v0: f64| {
            let mut prev = v0;
            for r in trace {
                assert!(r.objective <= prev + 1e-9 * prev.abs().max(1.0));
                assert!(r.dissipation_slack >= -1e-9 * prev.abs().max(1.0), "{r:?}");
                prev = r.objective;
            }
        };
        for (variant, step) in [(Variant::Sor, 1.5), (Variant::Ia, 0.1), (Variant::Blcd, 1.0)] {
            let spec = if variant == Variant::Blcd { &en } else { &eu };
            let out = run(&q, spec, x0.clone(), &SolverConfig::new(variant, step).with_max_iters(30), None).unwrap();
            check(&out.trace, out.initial_value);
        }
        for variant in [Variant::Bia, Variant::BiaModified, Variant::Bsor] {
            let cfg = SolverConfig::new(variant, 2.0).with_schedule(TauSchedule::DiagScaled).with_max_iters(30);
            let out = run(&q, &en, x0.clone(), &cfg, None).unwrap();
            check(&out.trace, out.initial_value);
        }
        let out = run(&l1, &en, x0.clone(), &SolverConfig::new(Variant::L1Bsor, 2.0).with_max_iters(30), None).unwrap();
        check(&out.trace, out.initial_value);

        let xd: Vec<f64> = (0..36).map(|i| ((i * 7) % 5) as f64 / 4.0).collect();
        let s = StudentTObjective::forward_differences(6, 6, 2.0, xd.clone()).unwrap();
        let spec = BregmanSpec::shifted_elastic_net(0.5, &xd).unwrap();
        let out = run(&s, &spec, xd.clone(), &SolverConfig::new(Variant::Bia, 1.0).with_max_iters(20), None).unwrap();
        check(&out.trace, out.initial_value);
    }

    #[test]
    fn rejects_mismatched_geometry() {
        let q = spd16();
        let en = BregmanSpec::elastic_net(16, 1.0).unwrap();
        let x0 = vec![0.0; 16];
        assert!(run(&q, &en, x0.clone(), &SolverConfig::new(Variant::Sor, 1.0), None).is_err());
        assert!(run(&q, &en, x0.clone(), &SolverConfig::new(Variant::Ia, 1.0), None).is_err());
        let boxed = BregmanSpec::elastic_net(16, 1.0).unwrap().with_box(0.0, 1.0).unwrap();
        assert!(run(&q, &boxed, x0.clone(), &SolverConfig::new(Variant::Bsor, 2.0), None).is_err());
        let l1 = L1QuadraticObjective::new(q, 1.0).unwrap();
        assert!(run(&l1, &en, x0, &SolverConfig::new(Variant::Bsor, 2.0), None).is_err());
    }

    #[test]
    fn reference_fills_relative_columns() {
        let q = spd16();
        let xs = solve_dense(&q);
        let vstar = q.value(&xs);
        let reference = Reference { vstar, xstar: Some(xs) };
        let cfg = SolverConfig::new(Variant::Sor, 1.0).with_max_iters(20);
        let mut seen = 0;
        let out = run_with(&q, &BregmanSpec::euclidean(16), vec![0.0; 16], &cfg, Some(&reference), |_| seen += 1).unwrap();
        assert_eq!(seen, 20);
        let first = out.trace[0].rel_objective;
        let last = out.trace.last().unwrap().rel_objective;
        assert!(first <= 1.0 && last <= first && last >= 0.0);
        for r in &out.trace {
            assert!((r.support_match + r.support_error - 1.0).abs() < 1e-15);
        }
    }
}
