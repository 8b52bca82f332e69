//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-12, max_intervals: 20_000 }
    }
}

impl QuadSettings {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }
}

/// One 15-point Kronrod panel: `(kronrod, error estimate)`.
fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kronrod.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let (kronrod, resabs, resasc) = (kronrod * half, resabs * half.abs(), resasc * half.abs());
    let mut err = (kronrod - gauss * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (kronrod, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
/// estimate until the total estimate drops below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, settings: QuadSettings) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0 });
    }
    let mut evaluations = 15;
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, err: e });
    let (mut total, mut total_err) = (v, e);
    loop {
        let tol = settings.abs_tol.max(settings.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if heap.len() >= settings.max_intervals {
            return Err(Error::Quadrature { achieved: total_err, requested: tol });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // Interval exhausted in floating point.
            return Err(Error::Quadrature { achieved: total_err, requested: tol });
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let (value, abs_error) = heap.iter().fold((0.0, 0.0), |(s, e), p| (s + p.value, e + p.err));
    Ok(QuadResult { value, abs_error, evaluations })
}

/// Integrates over `[a, ∞)` by summing panels of geometrically growing width
/// until two consecutive panels contribute less than the tolerance.
pub fn integrate_to_infinity(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    first_width: f64,
    settings: QuadSettings,
) -> Result<QuadResult> {
    let mut total = QuadResult { value: 0.0, abs_error: 0.0, evaluations: 0 };
    let mut lo = a;
    let mut width = first_width;
    let mut quiet = 0;
    for _ in 0..200 {
        let panel = integrate(&mut f, lo, lo + width, settings)?;
        total.value += panel.value;
        total.abs_error += panel.abs_error;
        total.evaluations += panel.evaluations;
        if panel.value.abs() <= settings.abs_tol * 0.1 {
            quiet += 1;
            if quiet >= 2 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        lo += width;
        width *= 2.0;
    }
    Err(Error::Quadrature { achieved: f64::INFINITY, requested: settings.abs_tol })
}
