use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point lies outside the box `[lower, upper]` where `J` is finite.
    #[error("value {value} outside the domain [{lower}, {upper}]")]
    Domain { value: f64, lower: f64, upper: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A subgradient argument is not an element of the subdifferential.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("zero or negative diagonal entry a[{index}][{index}] = {value}")]
    ZeroDiagonal { index: usize, value: f64 },

    /// The scalar residual kept its sign over the whole expansion range,
    /// i.e. the objective looks unbounded below along the search ray.
    #[error("no sign change within {max_offset:e} of x = {x} (direction {direction})")]
    Divergence { x: f64, direction: f64, max_offset: f64 },

    #[error("root finder did not converge after {iterations} iterations (bracket [{lo}, {hi}], residual {residual:e})")]
    Convergence { iterations: usize, lo: f64, hi: f64, residual: f64 },

    /// No branch of the closed-form l1-regularised update matched.
    #[error("no closed-form case matched at coordinate {coordinate}: {dump}")]
    CaseMismatch { coordinate: usize, dump: String },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("degenerate run: initial objective {v0} equals the optimum {vstar}")]
    DegenerateRun { v0: f64, vstar: f64 },
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
