//! Two-point discretization of the σ-derivative at `y = 0` and the Poisson
//! kernel of the weighted extension problem.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::constants::mu_sigma;
use crate::error::{Error, Result};
use crate::harness::estimate_order;
use crate::quadrature::{integrate, QuadResult, QuadSettings};
use crate::special::gamma;

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma < 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("sigma must lie in (0, 2), got {sigma}")))
    }
}

/// `F = σ (v(x, y) - v(x, 0)) / y^σ` from the two point values.
pub fn discrete_sigma_derivative(v0: f64, vy: f64, y: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if !(v0.is_finite() && vy.is_finite() && y.is_finite()) {
        return Err(Error::domain("non-finite input to the sigma-derivative quotient"));
    }
    if y <= 0.0 {
        return Err(Error::domain(format!("evaluation height must be positive, got {y}")));
    }
    Ok(sigma * (vy - v0) / y.powf(sigma))
}

/// `μ_σ F`, the approximation of `∂v/∂y^σ (x, 0) = -(-Δ)^{σ/2} v(·, 0)`.
pub fn normalized_sigma_derivative(v0: f64, vy: f64, y: f64, sigma: f64) -> Result<f64> {
    Ok(mu_sigma(sigma)? * discrete_sigma_derivative(v0, vy, y, sigma)?)
}

/// Both forms of the quotient at one height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaDerivSample {
    pub y: f64,
    pub quotient: f64,
    pub normalized: f64,
}

impl SigmaDerivSample {
    pub fn new(v0: f64, vy: f64, y: f64, sigma: f64) -> Result<Self> {
        let quotient = discrete_sigma_derivative(v0, vy, y, sigma)?;
        Ok(Self { y, quotient, normalized: mu_sigma(sigma)? * quotient })
    }
}

/// Constant making the Poisson kernel a probability density in `x` for
/// every `y`: `Γ((N+σ)/2) / (π^{N/2} Γ(σ/2))`.
pub fn poisson_normalization(n: u32, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if n == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let n = f64::from(n);
    Ok(gamma((n + sigma) / 2.0) / (PI.powf(n / 2.0) * gamma(sigma / 2.0)))
}

/// `P(x, y) = d_{N,σ} y^σ / (|x|^2 + y^2)^{(N+σ)/2}` with unit mass.
pub fn poisson_kernel(x: f64, y: f64, sigma: f64, n: u32) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain(format!("kernel height must be positive, got {y}")));
    }
    let d = poisson_normalization(n, sigma)?;
    let n = f64::from(n);
    Ok(d * y.powf(sigma) / (x * x + y * y).powf((n + sigma) / 2.0))
}

/// Default absolute tolerance of [`poisson_extension`].
pub const EXTENSION_TOL: f64 = 1e-10;

/// `v(x, y) = ∫ P(x - ξ, y) g(ξ) dξ` for bounded `g`.
///
/// The substitution `ξ = x ± y cot φ`, `φ = (π/2) s^{1/σ}` maps each half
/// line onto `s ∈ (0, 1]` and absorbs the kernel's weight, so the integrand
/// is bounded and no truncation of the real line is needed.
pub fn poisson_extension(g: impl Fn(f64) -> f64, x: f64, y: f64, sigma: f64) -> Result<f64> {
    Ok(poisson_extension_with(g, x, y, sigma, QuadSettings::with_abs_tol(EXTENSION_TOL))?.value)
}

pub fn poisson_extension_with(
    g: impl Fn(f64) -> f64,
    x: f64,
    y: f64,
    sigma: f64,
    settings: QuadSettings,
) -> Result<QuadResult> {
    if !(y > 0.0) {
        return Err(Error::domain(format!("extension height must be positive, got {y}")));
    }
    let d = poisson_normalization(1, sigma)?;
    let scale = d * (PI / 2.0).powf(sigma) / sigma;
    let inv_sigma = 1.0 / sigma;
    let integrand = |s: f64| {
        let phi = PI / 2.0 * s.powf(inv_sigma);
        let shape = if sigma == 1.0 { 1.0 } else { (phi.sin() / phi).powf(sigma - 1.0) };
        let offset = y / phi.tan();
        shape * (g(x + offset) + g(x - offset))
    };
    let mut r = integrate(integrand, 0.0, 1.0, QuadSettings { abs_tol: settings.abs_tol / scale, ..settings })?;
    r.value *= scale;
    r.abs_error *= scale;
    Ok(r)
}

/// Test functions for the σ-derivative order experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivTestFunction {
    /// `f(x, y) = exp(y^2)`, independent of `x`; its σ-derivative at
    /// `y = 0` vanishes for every σ.
    ExpYSquared,
}

impl DerivTestFunction {
    fn sample(self, y: f64) -> (f64, f64) {
        match self {
            DerivTestFunction::ExpYSquared => (1.0, (y * y).exp()),
        }
    }

    fn exact(self) -> f64 {
        0.0
    }
}

/// One row of the order experiment. `alpha` and `sigma_e` are absent on the
/// first row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivStudyRow {
    pub sigma: f64,
    pub y: f64,
    pub error: f64,
    pub alpha: Option<f64>,
    pub sigma_e: Option<f64>,
}

/// Error `E(y) = |F(x, y) - exact|` of the unnormalized quotient on a
/// decreasing ladder of heights, with the two-point order between
/// consecutive rows and `σ_e = 2 - α`.
pub fn deriv_order_study(sigma: f64, test: DerivTestFunction, ys: &[f64]) -> Result<Vec<DerivStudyRow>> {
    if ys.is_empty() {
        return Err(Error::domain("need at least one height"));
    }
    if ys.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("heights must be strictly decreasing"));
    }
    let mut rows: Vec<DerivStudyRow> = Vec::with_capacity(ys.len());
    for &y in ys {
        let (v0, vy) = test.sample(y);
        let error = (discrete_sigma_derivative(v0, vy, y, sigma)? - test.exact()).abs();
        let alpha = match rows.last() {
            Some(prev) => Some(estimate_order(prev.error, error, prev.y, y)?),
            None => None,
        };
        rows.push(DerivStudyRow { sigma, y, error, alpha, sigma_e: alpha.map(|a| 2.0 - a) });
    }
    Ok(rows)
}

pub const DERIV_CSV_HEADER: &str = "sigma,y,E,alpha,sigma_e";

/// Renders study rows as CSV with four decimals, blank cells where the
/// order is undefined.
pub fn deriv_rows_to_csv(rows: &[DerivStudyRow]) -> String {
    let mut out = String::from(DERIV_CSV_HEADER);
    out.push('\n');
    let cell = |v: Option<f64>| v.map(|a| format!("{a:.4}")).unwrap_or_default();
    for r in rows {
        let _ = writeln!(out, "{:.4},{:.4},{:.4},{},{}", r.sigma, r.y, r.error, cell(r.alpha), cell(r.sigma_e));
    }
    out
}
