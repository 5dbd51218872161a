//! `bia` command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

use bia_core::solvers::Variant;

use crate::experiment::{out_dir_or_default, run_experiment, write_outputs};
use crate::preset::{ExperimentConfig, Preset};

/// Runs Bregman Itoh-Abe experiments and writes per-sweep CSV traces.
///
/// Every random quantity (matrix, support, values, noise, start point,
/// image) comes from a child stream of `--seed`.
#[derive(Parser, Debug)]
#[command(name = "bia", version, about)]
pub struct Cli {
    /// gaussian_noiseless, gaussian_noiseless_binary, gaussian_noisy,
    /// gaussian_noisy_l1 or student_t_denoise
    #[arg(long)]
    pub preset: Preset,
    /// Comma-separated solver variants (default: the preset's pair)
    #[arg(long, value_delimiter = ',')]
    pub solvers: Option<Vec<Variant>>,
    /// Problem size; side length of the synthetic image for student_t_denoise
    #[arg(long)]
    pub n: Option<usize>,
    /// Fraction of nonzeros in the ground truth
    #[arg(long)]
    pub sparsity: Option<f64>,
    /// Use a 0/1 ground truth
    #[arg(long)]
    pub binary_gt: bool,
    /// Noise standard deviation relative to ||A x_true||_inf
    #[arg(long)]
    pub noise_level: Option<f64>,
    /// Weight of the l1 part of the Bregman function
    #[arg(long)]
    pub gamma: Option<f64>,
    /// l1 weight of the objective (gaussian_noisy_l1)
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Base time step; scaled by 1/a_ii on the Gaussian presets
    #[arg(long)]
    pub tau: Option<f64>,
    /// SOR relaxation and BLCD step (default 2 tau / (2 + tau))
    #[arg(long)]
    pub omega: Option<f64>,
    /// Sweep budget
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    /// Stop after three consecutive sweeps that move x and p by at most this
    #[arg(long, default_value_t = 0.0)]
    pub stop_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Clean 8-bit P5 image to corrupt and denoise
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Output directory (falls back to $BIA_OUT_DIR, then the current directory)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl Cli {
    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            preset: self.preset,
            solvers: self.solvers.clone(),
            n: self.n,
            sparsity: self.sparsity,
            binary_gt: self.binary_gt,
            noise_level: self.noise_level,
            gamma: self.gamma,
            lambda: self.lambda,
            tau: self.tau,
            omega: self.omega,
            iters: self.iters,
            stop_tol: self.stop_tol,
            seed: self.seed,
            image: self.image.clone(),
        }
    }
}

/// Parses `args`, runs the experiment and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let out_dir = out_dir_or_default(cli.out_dir.clone());
    let result = run_experiment(&cli.experiment()).and_then(|r| write_outputs(&r, &out_dir).map(|m| (r, m)));
    match result {
        Ok((r, manifest)) => {
            for run in &r.runs {
                let last = run.output.trace.last();
                println!(
                    "{:<14} sweeps {:>5}  objective {:>14.6e}  rel {:>10.3e}",
                    run.variant.to_string(),
                    run.output.trace.len(),
                    last.map_or(run.output.initial_value, |t| t.objective),
                    last.map_or(1.0, |t| t.rel_objective),
                );
            }
            println!("wrote {} files to {}", manifest.outputs.len(), out_dir.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
