//! Independent reference computations used to check the solver.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::constants::riesz_constant;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, QuadResult, QuadSettings};
use crate::special::gamma;

/// Default absolute tolerance of [`frac_laplacian_pv`].
pub const PV_TOL: f64 = 1e-8;
/// Default absolute tolerance of [`fractional_heat_solution`].
pub const HEAT_TOL: f64 = 1e-9;

// Inner cutoff below which the second difference is replaced by its
// even Taylor fit.
const PV_INNER: f64 = 0.01;

fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`, C^∞ in between.
fn window(u: f64) -> f64 {
    if u <= 1.0 {
        1.0
    } else if u >= 2.0 {
        0.0
    } else {
        let a = psi(2.0 - u);
        a / (a + psi(u - 1.0))
    }
}

/// `-χ'(u)`, a smooth bump supported on `[1, 2]` with unit mass.
fn window_slope(u: f64) -> f64 {
    if u <= 1.0 || u >= 2.0 {
        return 0.0;
    }
    let (s, r) = (2.0 - u, u - 1.0);
    let (a, b) = (psi(s), psi(r));
    // d/du [a / (a + b)] with a' = -a/s^2, b' = b/r^2.
    let da = -a / (s * s);
    let db = b / (r * r);
    -(da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
}

/// `κ_σ = ∫_0^∞ u^{-1-σ} (1 - χ(u)) du`.
fn window_tail_constant(sigma: f64) -> Result<f64> {
    let mid = integrate(
        |u| u.powf(-1.0 - sigma) * (1.0 - window(u)),
        1.0,
        2.0,
        QuadSettings { abs_tol: 1e-14, rel_tol: 1e-14, max_intervals: 2000 },
    )?;
    Ok(mid.value + 2f64.powf(-sigma) / sigma)
}

/// Window radius for a requested tolerance. For data oscillating at
/// frequency ω the neglected far field decays like `exp(-c sqrt(ω Z))`, so
/// the radius grows with the square of `log(1/tol)`.
fn pv_radius(tol: f64) -> f64 {
    (1.0 / tol).ln().powi(2).max(8.0)
}

/// `(-Δ)^{σ/2} g (x)` from the singular integral
/// `C_{1,σ} ∫_0^∞ (2g(x) - g(x+z) - g(x-z)) / z^{1+σ} dz`.
pub fn frac_laplacian_pv(g: impl Fn(f64) -> f64, x: f64, sigma: f64) -> Result<f64> {
    Ok(frac_laplacian_pv_with(g, x, sigma, PV_TOL)?.value)
}

/// As [`frac_laplacian_pv`] with an explicit absolute tolerance.
///
/// Near `z = 0` the second difference is fitted by `a z^2 + b z^4` and
/// integrated exactly. The rest is integrated against a smooth window of
/// radius `Z`; outside it the integrand is replaced by its far-field mean,
/// which is exact for constants and leaves an error that decays faster
/// than any power of `Z` for decaying or zero-mean oscillatory data.
pub fn frac_laplacian_pv_with(g: impl Fn(f64) -> f64, x: f64, sigma: f64, tol: f64) -> Result<QuadResult> {
    let c = riesz_constant(1, sigma)?;
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let gx = g(x);
    if !gx.is_finite() {
        return Err(Error::domain(format!("g is not finite at x = {x}")));
    }
    let h = |z: f64| 2.0 * gx - g(x + z) - g(x - z);

    let delta = PV_INNER;
    let (h1, h2) = (h(delta), h(delta / 2.0));
    // h(z) ≈ a z^2 + b z^4 through the two samples.
    let b = (h1 - 4.0 * h2) / (delta.powi(4) * (1.0 - 0.25));
    let a = (h1 - b * delta.powi(4)) / (delta * delta);
    let inner = a * delta.powf(2.0 - sigma) / (2.0 - sigma) + b * delta.powf(4.0 - sigma) / (4.0 - sigma);

    let big_z = pv_radius(tol);
    let panels = (2.0 * big_z).ceil();
    let settings = QuadSettings { abs_tol: tol / (4.0 * c * panels), rel_tol: 0.0, max_intervals: 50_000 };
    let mut evaluations = 2;
    let mut body = QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0 };
    // Panels of unit length keep the adaptive search honest on oscillatory data.
    let mut lo = delta;
    while lo < 2.0 * big_z {
        let hi = (lo.floor() + 1.0).min(2.0 * big_z);
        let r = integrate(|z| h(z) * window(z / big_z) * z.powf(-1.0 - sigma), lo, hi, settings)?;
        body.value += r.value;
        body.abs_error += r.abs_error;
        evaluations += r.evaluations;
        lo = hi;
    }
    let mean = integrate(
        |u| 0.5 * (g(x + u * big_z) + g(x - u * big_z)) * window_slope(u),
        1.0,
        2.0,
        QuadSettings { abs_tol: tol * 1e-2, rel_tol: 0.0, max_intervals: 20_000 },
    )?;
    evaluations += mean.evaluations;
    let kappa = kappa_cached(sigma)?;
    let tail = 2.0 * (gx - mean.value) * big_z.powf(-sigma) * kappa;

    let value = c * (inner + body.value + tail);
    let abs_error = c * (body.abs_error + mean.abs_error * 2.0 * big_z.powf(-sigma) * kappa);
    if abs_error > tol {
        return Err(Error::Quadrature { achieved: abs_error, requested: tol });
    }
    Ok(QuadResult { value, abs_error, evaluations })
}

fn kappa_cached(sigma: f64) -> Result<f64> {
    // The constant only depends on σ; cache the most recent value.
    static LAST: OnceLock<std::sync::Mutex<(f64, f64)>> = OnceLock::new();
    let cell = LAST.get_or_init(|| std::sync::Mutex::new((f64::NAN, f64::NAN)));
    if let Ok(guard) = cell.lock() {
        if guard.0 == sigma {
            return Ok(guard.1);
        }
    }
    let k = window_tail_constant(sigma)?;
    if let Ok(mut guard) = cell.lock() {
        *guard = (sigma, k);
    }
    Ok(k)
}

/// Fourier transform `∫ f(x) e^{-iξx} dx` of `A exp(-(x/w)^2)`.
pub fn gaussian_hat(amplitude: f64, width: f64) -> impl Fn(f64) -> f64 {
    move |xi: f64| amplitude * width * PI.sqrt() * (-(width * xi).powi(2) / 4.0).exp()
}

/// Solution at `(x, t)` of `∂u/∂t + (-Δ)^{σ/2} u = 0` for even real data
/// given by its Fourier transform:
/// `(1/π) ∫_0^∞ e^{-ξ^σ t} f̂(ξ) cos(ξx) dξ`.
pub fn fractional_heat_solution(f_hat: impl Fn(f64) -> f64, x: f64, t: f64, sigma: f64) -> Result<f64> {
    fractional_heat_solution_with(f_hat, x, t, sigma, HEAT_TOL)
}

pub fn fractional_heat_solution_with(f_hat: impl Fn(f64) -> f64, x: f64, t: f64, sigma: f64, tol: f64) -> Result<f64> {
    heat_extension_with(f_hat, x, 0.0, t, sigma, tol)
}

/// Whole half-space extension of the heat solution to height `y`:
/// each Fourier mode is multiplied by `Φ_σ(|ξ| y)`.
pub fn heat_extension_with(f_hat: impl Fn(f64) -> f64, x: f64, y: f64, t: f64, sigma: f64, tol: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::domain(format!("sigma must lie in (0, 2), got {sigma}")));
    }
    if !(t >= 0.0 && y >= 0.0) {
        return Err(Error::domain("time and height must be nonnegative"));
    }
    let settings = QuadSettings { abs_tol: tol * PI, rel_tol: 0.0, max_intervals: 20_000 };
    let integrand = |xi: f64| {
        let damp = (-xi.powf(sigma) * t).exp();
        let ext = if y == 0.0 { 1.0 } else { extension_multiplier(xi * y, sigma) };
        damp * ext * f_hat(xi) * (xi * x).cos()
    };
    let r = integrate_to_infinity(integrand, 0.0, 1.0, settings)?;
    Ok(r.value / PI)
}

/// `K_ν(s) = ∫_0^∞ e^{-s cosh u} cosh(νu) du` for `s > 0`.
pub fn bessel_k(nu: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::domain("bessel_k needs a positive argument"));
    }
    // Factor out e^{-s} to keep the integrand O(1) for large s.
    let f = |u: f64| (-s * (u.cosh() - 1.0)).exp() * (nu * u).cosh();
    let first = (2.0 / s).ln().max(0.0) + 1.0;
    let r = integrate_to_infinity(f, 0.0, first, QuadSettings { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 5000 })?;
    Ok(r.value * (-s).exp())
}

/// `Φ_σ(s) = 2^{1-ν} / Γ(ν) s^ν K_ν(s)` with `ν = σ/2`: the profile of
/// the extension of a unit-frequency mode, `Φ_σ(0) = 1`.
pub fn extension_multiplier(s: f64, sigma: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    if s > 700.0 {
        return 0.0;
    }
    let nu = sigma / 2.0;
    match bessel_k(nu, s) {
        Ok(k) => 2f64.powf(1.0 - nu) / gamma(nu) * s.powf(nu) * k,
        Err(_) => f64::NAN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarenblattExponents {
    pub alpha: f64,
    pub beta: f64,
}

pub fn barenblatt_exponents(n: u32, m: f64, sigma: f64) -> Result<BarenblattExponents> {
    if n == 0 || !(m >= 1.0) || !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::domain("need N >= 1, m >= 1 and sigma in (0, 2)"));
    }
    let n = f64::from(n);
    let den = n * (m + 1.0) + sigma;
    Ok(BarenblattExponents { alpha: n / den, beta: 1.0 / den })
}

/// `C T^{βσ} X^{-(N+σ)}`, the decay of the source-type solution at the
/// edge of the truncated domain.
pub fn lateral_bound(half_width: f64, horizon: f64, n: u32, m: f64, sigma: f64, constant: f64) -> Result<f64> {
    if !(half_width > 0.0 && horizon > 0.0) {
        return Err(Error::domain("X and T must be positive"));
    }
    let e = barenblatt_exponents(n, m, sigma)?;
    Ok(constant * horizon.powf(e.beta * sigma) * half_width.powf(-(f64::from(n) + sigma)))
}

/// `L / dx^{a/(N+σ)}`: the half-width that keeps the truncation error at
/// `O(dx^a)`.
pub fn min_domain_half_width(dx: f64, a: f64, n: u32, sigma: f64, l: f64) -> Result<f64> {
    if !(dx > 0.0 && dx < 1.0) || !(a > 0.0) || !(l > 0.0) || n == 0 {
        return Err(Error::domain("need dx in (0, 1), a > 0, L > 0, N >= 1"));
    }
    Ok(l / dx.powf(a / (f64::from(n) + sigma)))
}

/// `x,value` CSV for dumping oracle samples.
pub fn samples_csv(xs: &[f64], values: &[f64]) -> String {
    let mut s = String::from("x,value\n");
    for (x, v) in xs.iter().zip(values) {
        let _ = writeln!(s, "{x:.16e},{v:.16e}");
    }
    s
}
