//! Finite-difference solver for the fractional porous medium equation
//! `∂u/∂t + (-Δ)^{σ/2}(u^m) = 0` in one space dimension.
//!
//! The fractional Laplacian is realised through the extension to the half
//! plane: each step updates the trace explicitly from a two-point
//! σ-derivative quotient and then solves a weighted elliptic problem for
//! the extension. The crate also carries the reference computations and
//! refinement studies used to check the scheme.

// `!(x > 0.0)` is used on purpose so that NaN fails the check; the long
// float literals are standard quadrature and Lanczos coefficients.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod config;
pub mod constants;
pub mod error;
pub mod extension;
pub mod grid;
pub mod harness;
pub mod marcher;
pub mod oracles;
pub mod output;
pub mod quadrature;
pub mod sigma_deriv;
pub mod special;
pub mod stencil;

pub use config::{InitialData, RunConfig, SolverConfig, DEFAULT_CFL_SAFETY};
pub use constants::{
    cfl_max_dt, effective_order, mu_sigma, nu_sigma, riesz_constant, stable_dt, trace_convexity_dt, Constants,
};
pub use error::{Error, Result};
pub use extension::{discrete_max_location, ExtensionOperator, MonotoneReport};
pub use grid::{Field, Grid, NodeRegion};
pub use harness::{
    estimate_order, run_convergence, run_sigma_table, run_validate, select_scheme_params, ConvergenceReport,
    ReferenceKind, SchemeMode, SchemeParams, StudyBase, ValidateHooks,
};
pub use marcher::{boundary_update, initialize, march, step, MarchOptions, Marcher, SnapshotSchedule, Trajectory};
pub use oracles::{
    barenblatt_exponents, frac_laplacian_pv, fractional_heat_solution, lateral_bound, min_domain_half_width,
    BarenblattExponents,
};
pub use sigma_deriv::{
    deriv_order_study, discrete_sigma_derivative, normalized_sigma_derivative, poisson_extension, poisson_kernel,
    SigmaDerivSample,
};
pub use stencil::StencilSpec;
