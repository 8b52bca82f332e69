//! Gamma function and the handful of special values the scheme needs.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function by the Lanczos approximation (g = 7, nine terms), with the
/// reflection formula below 1/2. Returns NaN at the poles.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        if s == 0.0 {
            return f64::NAN;
        }
        PI / (s * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (j, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + j as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// `w^(1/m)` with the degenerate point `w = 0` mapped to 0.
#[inline]
pub fn root_m(w: f64, m: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else if m == 1.0 {
        w
    } else {
        (w.ln() / m).exp()
    }
}

/// `u^m` with `u = 0` mapped to 0.
#[inline]
pub fn pow_m(u: f64, m: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else if m == 1.0 {
        u
    } else {
        (m * u.ln()).exp()
    }
}
