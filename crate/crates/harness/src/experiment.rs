//! Problem generation, solver dispatch and output files for one invocation.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use serde::Serialize;

use bia_core::metrics::{relative_objective, Reference};
use bia_core::objectives::{add_noise, gaussian_start, gaussian_system, impulse_noise, piecewise_constant_image};
use bia_core::solvers::{blcd_equivalent_gamma, run, RunOutput, SolverConfig, TauSchedule, Variant};
use bia_core::{BregmanSpec, CoordinateObjective, L1QuadraticObjective, QuadraticObjective, StudentTObjective};

use crate::error::{HarnessError, Result};
use crate::pgm::{read_pgm, write_pgm, GreyImage};
use crate::preset::{ExperimentConfig, Params, Preset};
use crate::trace_csv::write_trace_csv;

/// The reference run gets this many times the sweep budget.
pub const REFERENCE_BUDGET_FACTOR: usize = 10;

#[derive(Debug, Clone)]
pub enum Problem {
    Quadratic { q: QuadraticObjective, x_true: Vec<f64>, noiseless: bool },
    L1 { v: L1QuadraticObjective, x0: Vec<f64> },
    Image { s: StudentTObjective, clean: Vec<f64>, noisy: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub params: Params,
    pub problem: Problem,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let mut params = cfg.resolve()?;
    let seed = params.seed;
    let problem = match params.preset {
        Preset::StudentTDenoise => {
            let (h, w, clean) = match &cfg.image {
                Some(path) => {
                    let img = read_pgm(path)?;
                    if img.height < 2 || img.width < 2 {
                        return Err(HarnessError::Flag(format!("{}: image must be at least 2x2", path.display())));
                    }
                    (img.height, img.width, img.pixels)
                }
                None => {
                    let side = params.height.unwrap_or(crate::preset::DEFAULT_IMAGE_SIDE);
                    (side, side, piecewise_constant_image(side, side, seed))
                }
            };
            params.height = Some(h);
            params.width = Some(w);
            params.n = h * w;
            let noisy = impulse_noise(&clean, params.noise_level.unwrap_or(0.1), seed).map_err(HarnessError::Setup)?;
            let s = StudentTObjective::forward_differences(h, w, params.phi.unwrap_or(2.0), noisy.clone())
                .map_err(HarnessError::Setup)?;
            Problem::Image { s, clean, noisy }
        }
        preset => {
            let n = params.n;
            let sys = gaussian_system(n, params.sparsity.unwrap_or(0.1), params.binary_gt.unwrap_or(false), seed)
                .map_err(HarnessError::Setup)?;
            let level = params.noise_level.unwrap_or(0.0);
            let q = if level > 0.0 {
                let b = add_noise(sys.problem.rhs(), &sys.problem, &sys.x_true, level, seed).map_err(HarnessError::Setup)?;
                sys.problem.with_rhs(b).map_err(HarnessError::Setup)?
            } else {
                sys.problem
            };
            if preset == Preset::GaussianNoisyL1 {
                let x0 = gaussian_start(n, seed);
                let v = L1QuadraticObjective::new(q, params.lambda.unwrap_or(100.0)).map_err(HarnessError::Setup)?;
                Problem::L1 { v, x0 }
            } else {
                Problem::Quadratic { q, x_true: sys.x_true, noiseless: level == 0.0 }
            }
        }
    };
    Ok(Prepared { params, problem })
}

/// Geometry, configuration and start point of one solver on a prepared problem.
#[derive(Debug, Clone)]
pub struct SolverSetup {
    pub spec: BregmanSpec,
    pub cfg: SolverConfig,
    pub x0: Vec<f64>,
}

pub fn setup(prepared: &Prepared, variant: Variant, iters: usize, stop_tol: f64) -> Result<SolverSetup> {
    let p = &prepared.params;
    let n = p.n;
    let setup_err = HarnessError::Setup;
    let (spec, cfg, x0) = match &prepared.problem {
        Problem::Image { noisy, .. } => {
            let spec = match variant {
                Variant::Ia => BregmanSpec::euclidean(n),
                _ => BregmanSpec::shifted_elastic_net(p.gamma, noisy).map_err(setup_err)?,
            };
            let cfg = SolverConfig::new(variant, p.tau).with_schedule(TauSchedule::Constant);
            (spec, cfg, noisy.clone())
        }
        problem => {
            let omega = p.omega.unwrap_or(1.0);
            let spec = match variant {
                Variant::Sor | Variant::GaussSeidel | Variant::Ia => BregmanSpec::euclidean(n),
                Variant::Blcd => BregmanSpec::elastic_net(n, blcd_equivalent_gamma(p.gamma, omega)).map_err(setup_err)?,
                _ => BregmanSpec::elastic_net(n, p.gamma).map_err(setup_err)?,
            };
            let step = match variant {
                Variant::Sor | Variant::GaussSeidel | Variant::Blcd => omega,
                _ => p.tau,
            };
            let cfg = SolverConfig::new(variant, step).with_schedule(TauSchedule::DiagScaled);
            let x0 = match problem {
                Problem::L1 { x0, .. } => x0.clone(),
                _ => vec![0.0; n],
            };
            (spec, cfg, x0)
        }
    };
    let cfg = cfg.with_max_iters(iters).with_stop_tol(stop_tol);
    Ok(SolverSetup { spec, cfg, x0 })
}

fn run_on<V: CoordinateObjective>(v: &V, s: &SolverSetup, reference: Option<&Reference>) -> bia_core::Result<RunOutput> {
    run(v, &s.spec, s.x0.clone(), &s.cfg, reference)
}

pub fn run_setup(prepared: &Prepared, s: &SolverSetup, reference: Option<&Reference>) -> bia_core::Result<RunOutput> {
    match &prepared.problem {
        Problem::Quadratic { q, .. } => run_on(q, s, reference),
        Problem::L1 { v, .. } => run_on(v, s, reference),
        Problem::Image { s: obj, .. } => run_on(obj, s, reference),
    }
}

pub fn objective_value(prepared: &Prepared, x: &[f64]) -> f64 {
    match &prepared.problem {
        Problem::Quadratic { q, .. } => q.value(x),
        Problem::L1 { v, .. } => v.value(x),
        Problem::Image { s, .. } => s.value(x),
    }
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub variant: Variant,
    pub output: RunOutput,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub prepared: Prepared,
    pub vstar: f64,
    pub xstar: Option<Vec<f64>>,
    pub reference_solver: Variant,
    pub reference_sweeps: usize,
    pub runs: Vec<SolverRun>,
}

fn min_objective(out: &RunOutput) -> f64 {
    out.trace.iter().map(|r| r.objective).fold(out.initial_value, f64::min)
}

/// Runs the reference solver, then every requested solver on its own thread,
/// and fills `rel_objective` against the smallest objective seen anywhere.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let prepared = prepare(cfg)?;
    let params = &prepared.params;
    let variants: Vec<Variant> = params.solvers.iter().map(|s| s.parse().expect("resolved solver name")).collect();

    let ref_variant = params.preset.reference_solver();
    let ref_setup = setup(&prepared, ref_variant, params.iters * REFERENCE_BUDGET_FACTOR, 0.0)?;
    let ref_out = run_setup(&prepared, &ref_setup, None)
        .map_err(|source| HarnessError::Reference { variant: ref_variant, source })?;
    let mut vstar = min_objective(&ref_out);
    let xstar = match &prepared.problem {
        Problem::Quadratic { x_true, noiseless: true, q } => {
            vstar = vstar.min(q.value(x_true));
            Some(x_true.clone())
        }
        Problem::Image { .. } => None,
        _ => Some(ref_out.state.x.clone()),
    };
    let provisional = Reference { vstar, xstar: xstar.clone() };

    let outcomes: Vec<Result<RunOutput>> = thread::scope(|scope| {
        let handles: Vec<_> = variants
            .iter()
            .map(|&variant| {
                let prepared = &prepared;
                let provisional = &provisional;
                scope.spawn(move || {
                    let s = setup(prepared, variant, params.iters, params.stop_tol)?;
                    run_setup(prepared, &s, Some(provisional)).map_err(|source| HarnessError::Solver { variant, source })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let mut runs = Vec::with_capacity(variants.len());
    for (variant, out) in variants.iter().zip(outcomes) {
        runs.push(SolverRun { variant: *variant, output: out? });
    }

    for r in &runs {
        vstar = vstar.min(min_objective(&r.output));
    }
    for r in &mut runs {
        let v0 = r.output.initial_value;
        for rec in &mut r.output.trace {
            rec.rel_objective = relative_objective(rec.objective, v0, vstar)
                .map_err(|source| HarnessError::Solver { variant: r.variant, source })?;
        }
    }

    Ok(ExperimentResult {
        reference_sweeps: ref_out.trace.len(),
        prepared,
        vstar,
        xstar,
        reference_solver: ref_variant,
        runs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub library_version: &'static str,
    pub params: Params,
    pub vstar: f64,
    pub reference_solver: String,
    pub reference_sweeps: usize,
    pub clarke_dist: &'static str,
    pub sweeps: Vec<(String, usize)>,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

pub fn csv_name(preset: Preset, variant: Variant) -> String {
    format!("{preset}_{variant}.csv")
}

pub fn manifest_name(preset: Preset) -> String {
    format!("{preset}_manifest.json")
}

/// Writes one CSV per solver, the manifest, and for images `noisy.pgm` and
/// `out.pgm` (the Bregman run if present, else the first solver).
pub fn write_outputs(result: &ExperimentResult, out_dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;
    let params = &result.prepared.params;
    let mut outputs: Vec<String> = result.runs.iter().map(|r| csv_name(params.preset, r.variant)).collect();
    if let Problem::Image { .. } = result.prepared.problem {
        outputs.push("noisy.pgm".into());
        outputs.push("out.pgm".into());
    }
    outputs.push(manifest_name(params.preset));

    let manifest = Manifest {
        library_version: env!("CARGO_PKG_VERSION"),
        params: params.clone(),
        vstar: result.vstar,
        reference_solver: result.reference_solver.to_string(),
        reference_sweeps: result.reference_sweeps,
        clarke_dist: "exact",
        sweeps: result.runs.iter().map(|r| (r.variant.to_string(), r.output.trace.len())).collect(),
        outputs: outputs.clone(),
    };
    let manifest_json = serde_json::to_string(&manifest).expect("manifest serialises");

    for r in &result.runs {
        let header = vec![
            ("preset".to_string(), params.preset.to_string()),
            ("solver".to_string(), r.variant.to_string()),
            ("seed".to_string(), params.seed.to_string()),
            ("vstar".to_string(), format!("{:e}", result.vstar)),
            ("vstar_source".to_string(), format!(
                "min over a {}-sweep {} reference run and all traces",
                params.iters * REFERENCE_BUDGET_FACTOR,
                result.reference_solver
            )),
            ("initial_objective".to_string(), format!("{:e}", r.output.initial_value)),
            ("clarke_dist".to_string(), "exact (coordinate intervals)".to_string()),
            ("manifest".to_string(), manifest_json.clone()),
        ];
        let path = out_dir.join(csv_name(params.preset, r.variant));
        write_trace_csv(&path, &header, &r.output.trace)?;
    }

    if let Problem::Image { noisy, .. } = &result.prepared.problem {
        let (h, w) = (params.height.unwrap_or(0), params.width.unwrap_or(0));
        let pick = result
            .runs
            .iter()
            .find(|r| r.variant.is_bregman())
            .or(result.runs.first())
            .expect("at least one solver");
        write_pgm(&out_dir.join("noisy.pgm"), &GreyImage { height: h, width: w, pixels: noisy.clone() })?;
        write_pgm(&out_dir.join("out.pgm"), &GreyImage { height: h, width: w, pixels: pick.output.state.x.clone() })?;
    }

    let path = out_dir.join(manifest_name(params.preset));
    let pretty = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    fs::write(&path, pretty + "\n").map_err(|e| HarnessError::io(&path, e))?;
    Ok(manifest)
}

/// Resolves the output directory: the flag, then `BIA_OUT_DIR`, then `.`.
pub fn out_dir_or_default(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("BIA_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}
