//! Experiment runner for the Bregman Itoh-Abe solvers: presets, problem
//! generation, parallel solver dispatch, CSV traces and PGM images.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod pgm;
pub mod preset;
pub mod trace_csv;

pub use error::{HarnessError, Result};
pub use experiment::{prepare, run_experiment, write_outputs, ExperimentResult, Manifest};
pub use preset::{ExperimentConfig, Params, Preset};
