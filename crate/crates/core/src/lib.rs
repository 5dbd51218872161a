//! Bregman Itoh-Abe discrete gradient methods.
//!
//! The solvers discretise the inverse scale space flow `p' = -dV(x)`,
//! `p in dJ(x)` with the Itoh-Abe (coordinate increment) discrete gradient.
//! One sweep visits the coordinates in order and solves a scalar inclusion
//! per coordinate, so every sweep dissipates
//! `V(x^k) - V(x^{k+1}) >= (mu / tau_max) ||x^{k+1} - x^k||^2` for any
//! positive time steps.
//!
//! * [`bregman`]: separable Bregman functions, subdifferential intervals,
//!   Bregman distances, shrinkage.
//! * [`objectives`]: objectives behind the coordinate interface (quadratic,
//!   l1-regularised quadratic, Student-t denoising) and problem generators.
//! * [`inclusion`]: the scalar implicit step for general objectives.
//! * [`solvers`]: SOR, Itoh-Abe, Bregman Itoh-Abe, the closed-form Bregman SOR
//!   variants, Bregman linearised coordinate descent, and the run loop.
//! * [`metrics`]: per-sweep diagnostics.

pub mod bregman;
pub mod brent;
pub mod error;
pub mod inclusion;
pub mod metrics;
pub mod objectives;
pub mod seeds;
pub mod solvers;

pub use bregman::{shrink, project_box, BregmanKind, BregmanSpec, Interval, PrimalDualState, ScalarBregman};
pub use error::{Error, Result};
pub use inclusion::{solve_inclusion, BoxMode, InclusionOptions, InclusionProblem, InclusionSolution};
pub use metrics::{Reference, TraceRecord};
pub use objectives::{CoordinateObjective, L1QuadraticObjective, QuadraticObjective, StudentTObjective};
pub use solvers::{run, SolverConfig, SweepResult, TauSchedule, Variant};
