//! Scalar constants of the scheme.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::gamma;

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 && sigma < 2.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("sigma must lie in (0, 2), got {sigma}")))
    }
}

/// Normalization of the σ-derivative: `2^(σ-1) Γ(σ/2) / Γ(1-σ/2)`.
pub fn mu_sigma(sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(2f64.powf(sigma - 1.0) * gamma(sigma / 2.0) / gamma(1.0 - sigma / 2.0))
}

/// `ν_σ = σ μ_σ`, the coefficient of the explicit trace update.
pub fn nu_sigma(sigma: f64) -> Result<f64> {
    Ok(sigma * mu_sigma(sigma)?)
}

/// Normalization constant of the singular-integral form of the fractional
/// Laplacian in `n` dimensions.
pub fn riesz_constant(n: u32, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if n == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    let n = f64::from(n);
    Ok(2f64.powf(sigma - 1.0) * sigma * gamma((n + sigma) / 2.0) / (PI.powf(n / 2.0) * gamma(1.0 - sigma / 2.0)))
}

/// Largest time step allowed by the discrete maximum principle,
/// `C(m, f) dx^σ` with `C(m, f) = [m b_max^(m-1) ν_σ]^(-1)`.
///
/// Returns `+inf` for trivial data (`b_max = 0`, `m > 1`).
pub fn cfl_max_dt(m: f64, b_max: f64, sigma: f64, dx: f64) -> Result<f64> {
    check_precondition(m, b_max, dx)?;
    let nu = nu_sigma(sigma)?;
    if m == 1.0 {
        return Ok(dx.powf(sigma) / nu);
    }
    if b_max == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(dx.powf(sigma) / (m * b_max.powf(m - 1.0) * nu))
}

/// Time-step bound that keeps the trace update a convex combination in the
/// `u = w^(1/m)` variable: `dx^σ / (m b_max^((m-1)/m) ν_σ)`.
///
/// For `b_max >= 1` this is looser than [`cfl_max_dt`]; for `b_max < 1` it is
/// the tighter of the two.
pub fn trace_convexity_dt(m: f64, b_max: f64, sigma: f64, dx: f64) -> Result<f64> {
    check_precondition(m, b_max, dx)?;
    let nu = nu_sigma(sigma)?;
    if m == 1.0 {
        return Ok(dx.powf(sigma) / nu);
    }
    if b_max == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(dx.powf(sigma) / (m * b_max.powf((m - 1.0) / m) * nu))
}

/// The step size the marcher accepts as stable: the minimum of
/// [`cfl_max_dt`] and [`trace_convexity_dt`].
pub fn stable_dt(m: f64, b_max: f64, sigma: f64, dx: f64) -> Result<f64> {
    Ok(cfl_max_dt(m, b_max, sigma, dx)?.min(trace_convexity_dt(m, b_max, sigma, dx)?))
}

fn check_precondition(m: f64, b_max: f64, dx: f64) -> Result<()> {
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::domain(format!("m must be >= 1, got {m}")));
    }
    if !(b_max >= 0.0 && b_max.is_finite()) {
        return Err(Error::domain(format!("b_max must be finite and >= 0, got {b_max}")));
    }
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::domain(format!("dx must be positive, got {dx}")));
    }
    Ok(())
}

/// Consistency order of the discretized extension operator built from an
/// order-`c` Laplacian and an order-`d` first derivative.
///
/// For σ in (0, 1] this is `min(c, d - σ)`, for σ in (1, 2) it is
/// `min(c + 1 - σ, d - σ)`. At σ = 1 the first-derivative term vanishes and
/// the order is `c`. A non-positive order is reported as
/// [`Error::NonConvergentOrder`].
pub fn effective_order(sigma: f64, c: u32, d: u32) -> Result<f64> {
    check_sigma(sigma)?;
    if c == 0 || d == 0 {
        return Err(Error::domain("stencil orders must be positive"));
    }
    let (cf, df) = (f64::from(c), f64::from(d));
    let order = if sigma == 1.0 {
        cf
    } else if sigma < 1.0 {
        cf.min(df - sigma)
    } else {
        (cf + 1.0 - sigma).min(df - sigma)
    };
    if order <= 0.0 {
        return Err(Error::NonConvergentOrder { sigma, c, d, order });
    }
    Ok(order)
}

/// The bundle of constants used by one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub sigma: f64,
    pub mu_sigma: f64,
    pub nu_sigma: f64,
    pub riesz: f64,
    pub b_max: f64,
}

impl Constants {
    pub fn new(sigma: f64, b_max: f64) -> Result<Self> {
        let mu = mu_sigma(sigma)?;
        Ok(Self { sigma, mu_sigma: mu, nu_sigma: sigma * mu, riesz: riesz_constant(1, sigma)?, b_max })
    }
}
