use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-convergent discretization: effective order {order} <= 0 for sigma={sigma}, c={c}, d={d}")]
    NonConvergentOrder { sigma: f64, c: u32, d: u32, order: f64 },

    #[error("unsupported stencil orders (c={c}, d={d})")]
    UnsupportedStencil { c: u32, d: u32 },

    #[error("mesh too small for stencil: {0}")]
    MeshTooSmall(String),

    #[error("linear solve failed: {reason} (condition estimate {condition_estimate:e})")]
    Solver { reason: String, condition_estimate: f64 },

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("CFL violation: dt={dt:e} exceeds admissible {max_dt:e}")]
    CflViolation { dt: f64, max_dt: f64 },

    #[error("negative trace bracket {value:e} at node i={i} (step {step})")]
    NegativeBracket { value: f64, i: usize, step: usize },

    #[error("non-finite value at node (i={i}, k={k}) in step {step}")]
    NonFinite { i: usize, k: usize, step: usize },

    #[error("maximum principle violated at step {step}: value {value:e} outside [0, {b_max:e}] at (i={i}, k={k})")]
    BoundsViolation { step: usize, i: usize, k: usize, value: f64, b_max: f64 },

    #[error("convergence study failed at level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
