//! Time integration: explicit nonlinear update of the trace row followed
//! by an elliptic solve for the rest of the extension.

use std::fmt::Write as _;
use std::io;

use crate::config::{InitialData, SolverConfig};
use crate::constants::{nu_sigma, stable_dt};
use crate::error::{Error, Result};
use crate::extension::ExtensionOperator;
use crate::grid::{Field, Grid};
use crate::special::{pow_m, root_m};

/// Brackets in `[-BRACKET_CLAMP, 0)` are rounding noise and are set to 0.
pub const BRACKET_CLAMP: f64 = 1e-12;
/// Slack allowed on the bounds `0 <= W <= b_max`.
pub const BOUNDS_SLACK: f64 = 1e-10;

/// What to do with a bracket below `-BRACKET_CLAMP`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativityPolicy {
    #[default]
    Abort,
    /// Clamp to 0 and count; for stencils without the monotone structure.
    ClampAndCount,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum SnapshotSchedule {
    #[default]
    None,
    All,
    /// Snapshots at the steps nearest to these times.
    Times(Vec<f64>),
    /// `first, first*ratio, first*ratio^2, ...` up to the horizon.
    Geometric {
        first: f64,
        ratio: f64,
    },
}

impl SnapshotSchedule {
    /// Step indices to capture for `nt` steps of size `dt`.
    fn steps(&self, nt: usize, dt: f64) -> Result<Vec<usize>> {
        let snap = |t: f64| ((t / dt).round() as usize).min(nt);
        let mut out: Vec<usize> = match self {
            SnapshotSchedule::None => Vec::new(),
            SnapshotSchedule::All => (0..=nt).collect(),
            SnapshotSchedule::Times(ts) => {
                if ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                    return Err(Error::config("snapshot times must be finite and nonnegative"));
                }
                ts.iter().map(|&t| snap(t)).collect()
            }
            SnapshotSchedule::Geometric { first, ratio } => {
                if !(*first > 0.0 && *ratio > 1.0) {
                    return Err(Error::config("geometric schedule needs first > 0 and ratio > 1"));
                }
                let horizon = nt as f64 * dt;
                let mut v = Vec::new();
                let mut t = *first;
                while t <= horizon * (1.0 + 1e-12) {
                    v.push(snap(t));
                    t *= ratio;
                }
                v
            }
        };
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarchOptions {
    pub schedule: SnapshotSchedule,
    /// Abort on the first node outside `[-slack, b_max + slack]`. When off,
    /// violations are only counted.
    pub enforce_bounds: bool,
    pub negativity: NegativityPolicy,
}

impl MarchOptions {
    pub fn new(schedule: SnapshotSchedule) -> Self {
        Self { schedule, enforce_bounds: true, negativity: NegativityPolicy::Abort }
    }

    /// Options for stencils that lack the monotone structure.
    pub fn lenient(schedule: SnapshotSchedule) -> Self {
        Self { schedule, enforce_bounds: false, negativity: NegativityPolicy::ClampAndCount }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub max: f64,
    pub min: f64,
    /// `dt` over the stable step for this run's `b_max`.
    pub cfl_ratio: f64,
    pub clamped: usize,
    pub bound_violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub m: f64,
    pub dt: f64,
    pub b_max: f64,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub snapshots: Vec<(f64, Field)>,
    /// `u = w^{1/m}` on the trace row (all `I + 1` nodes) for `j = 0..=J`.
    pub trace_history: Vec<Vec<f64>>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub final_field: Field,
}

impl Trajectory {
    pub fn final_trace(&self) -> &[f64] {
        self.trace_history.last().expect("at least the initial row")
    }

    pub fn total_clamped(&self) -> usize {
        self.diagnostics.iter().map(|d| d.clamped).sum()
    }

    pub fn total_bound_violations(&self) -> usize {
        self.diagnostics.iter().map(|d| d.bound_violations).sum()
    }

    /// `t,x,y,w` rows for every captured snapshot.
    pub fn snapshots_csv(&self) -> String {
        let mut s = String::from("t,x,y,w\n");
        for (t, f) in &self.snapshots {
            for (k, y) in self.ys.iter().enumerate() {
                for (i, x) in self.xs.iter().enumerate() {
                    let _ = writeln!(s, "{t:.16e},{x:.16e},{y:.16e},{:.16e}", f.get(i, k));
                }
            }
        }
        s
    }

    /// `t,x,u` rows for every time level.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("t,x,u\n");
        for (j, row) in self.trace_history.iter().enumerate() {
            let t = j as f64 * self.dt;
            for (x, u) in self.xs.iter().zip(row) {
                let _ = writeln!(s, "{t:.16e},{x:.16e},{u:.16e}");
            }
        }
        s
    }

    pub fn write_snapshots(&self, mut out: impl io::Write) -> Result<()> {
        out.write_all(self.snapshots_csv().as_bytes())?;
        Ok(())
    }

    pub fn write_trace(&self, mut out: impl io::Write) -> Result<()> {
        out.write_all(self.trace_csv().as_bytes())?;
        Ok(())
    }
}

/// `W_0`: trace row `f^m`, zero lateral data, interior from the elliptic
/// solve.
pub fn initialize(op: &ExtensionOperator, f: &[f64], m: f64) -> Result<Field> {
    let g = &op.grid;
    if f.len() != g.nx - 1 {
        return Err(Error::domain(format!("need {} trace values, got {}", g.nx - 1, f.len())));
    }
    if let Some(bad) = f.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::domain(format!("initial data must be finite and nonnegative, found {bad}")));
    }
    let mut field = Field::zeros(g);
    for (dst, &v) in field.row_mut(0)[1..g.nx].iter_mut().zip(f) {
        *dst = pow_m(v, m);
    }
    op.solve_field(&mut field)?;
    Ok(field)
}

/// Explicit trace update `[ν_σ dt/dx^σ (W^1 - W^0) + (W^0)^{1/m}]^m`,
/// elementwise.
pub fn boundary_update(row0: &[f64], row1: &[f64], dt: f64, dx: f64, sigma: f64, m: f64) -> Result<Vec<f64>> {
    let ratio = nu_sigma(sigma)? * dt / dx.powf(sigma);
    let mut out = vec![0.0; row0.len()];
    update_into(row0, row1, ratio, m, NegativityPolicy::Abort, 0, 0, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn update_into(
    row0: &[f64],
    row1: &[f64],
    ratio: f64,
    m: f64,
    policy: NegativityPolicy,
    step: usize,
    offset: usize,
    out: &mut [f64],
) -> Result<usize> {
    if row0.len() != row1.len() {
        return Err(Error::domain("trace rows differ in length"));
    }
    let mut clamped = 0;
    for (p, ((&w0, &w1), dst)) in row0.iter().zip(row1).zip(out.iter_mut()).enumerate() {
        let mut bracket = ratio * (w1 - w0) + root_m(w0.max(0.0), m);
        if bracket < 0.0 {
            if bracket < -BRACKET_CLAMP && policy == NegativityPolicy::Abort {
                return Err(Error::NegativeBracket { value: bracket, i: p + offset, step });
            }
            if bracket < -BRACKET_CLAMP {
                clamped += 1;
            }
            bracket = 0.0;
        }
        *dst = pow_m(bracket, m);
    }
    Ok(clamped)
}

/// One time step from `state`, with the abort-on-anything policy.
pub fn step(state: &Field, op: &ExtensionOperator, config: &SolverConfig) -> Result<Field> {
    let ratio = config.update_ratio()?;
    step_with(state, op, ratio, config.m, NegativityPolicy::Abort).map(|(f, _)| f)
}

fn step_with(
    state: &Field,
    op: &ExtensionOperator,
    ratio: f64,
    m: f64,
    policy: NegativityPolicy,
) -> Result<(Field, usize)> {
    let nx = op.grid.nx;
    let step = state.time_index + 1;
    let mut next = Field::zeros(&op.grid);
    next.time_index = step;
    let clamped = update_into(
        &state.row(0)[1..nx],
        &state.row(1)[1..nx],
        ratio,
        m,
        policy,
        step,
        1,
        &mut next.row_mut(0)[1..nx],
    )?;
    op.solve_field(&mut next)?;
    if let Some((i, k)) = next.first_non_finite() {
        return Err(Error::NonFinite { i, k, step });
    }
    Ok((next, clamped))
}

/// A prepared run: grid, operator and the constants of the update.
#[derive(Debug)]
pub struct Marcher {
    pub config: SolverConfig,
    pub grid: Grid,
    pub op: ExtensionOperator,
}

impl Marcher {
    pub fn new(config: &SolverConfig) -> Result<Self> {
        let grid = Grid::new(config)?;
        let op = ExtensionOperator::assemble(&grid, config.sigma, config.c, config.d)?;
        Ok(Self { config: config.clone(), grid, op })
    }

    /// Runs `J` steps from trace data `f` (on the `I - 1` trace nodes).
    pub fn run(&self, f: &[f64], options: &MarchOptions) -> Result<Trajectory> {
        let cfg = &self.config;
        let m = cfg.m;
        let b_max = f.iter().map(|&v| pow_m(v.max(0.0), m)).fold(0.0, f64::max);
        cfg.check_cfl(b_max)?;
        let dt = cfg.dt();
        let stable = stable_dt(m, b_max, cfg.sigma, cfg.dx())?;
        let cfl_ratio = if stable.is_finite() { dt / stable } else { 0.0 };
        let ratio = cfg.update_ratio()?;
        let capture = options.schedule.steps(cfg.nt, dt)?;
        let mut capture_iter = capture.iter().peekable();

        let mut state = initialize(&self.op, f, m)?;
        let mut snapshots = Vec::new();
        let mut trace_history = Vec::with_capacity(cfg.nt + 1);
        let mut diagnostics = Vec::with_capacity(cfg.nt + 1);
        let mut clamped = 0;
        for j in 0..=cfg.nt {
            if j > 0 {
                let (next, c) = step_with(&state, &self.op, ratio, m, options.negativity)?;
                state = next;
                clamped = c;
            }
            let violations = check_bounds(&state, b_max, options.enforce_bounds, j)?;
            diagnostics.push(StepDiagnostics {
                step: j,
                max: state.max(),
                min: state.min(),
                cfl_ratio,
                clamped,
                bound_violations: violations,
            });
            trace_history.push(state.row(0).iter().map(|&w| root_m(w.max(0.0), m)).collect());
            if capture_iter.peek() == Some(&&j) {
                capture_iter.next();
                snapshots.push((j as f64 * dt, state.clone()));
            }
        }
        Ok(Trajectory {
            m,
            dt,
            b_max,
            xs: self.grid.xs.clone(),
            ys: self.grid.ys.clone(),
            snapshots,
            trace_history,
            diagnostics,
            final_field: state,
        })
    }
}

fn check_bounds(field: &Field, b_max: f64, enforce: bool, step: usize) -> Result<usize> {
    let mut count = 0;
    let w = field.nx + 1;
    for (p, &v) in field.values.iter().enumerate() {
        if v < -BOUNDS_SLACK || v > b_max + BOUNDS_SLACK {
            if enforce {
                return Err(Error::BoundsViolation { step, i: p % w, k: p / w, value: v, b_max });
            }
            count += 1;
        }
    }
    Ok(count)
}

/// Convenience wrapper: build the operator and march `f` to the horizon.
pub fn march(config: &SolverConfig, f: &InitialData, capture: SnapshotSchedule) -> Result<Trajectory> {
    let marcher = Marcher::new(config)?;
    let values = f.trace_values(&marcher.grid)?;
    let options =
        if marcher.op.stencil.is_default() { MarchOptions::new(capture) } else { MarchOptions::lenient(capture) };
    marcher.run(&values, &options)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(sigma: f64, m: f64, n: usize, nt: usize, horizon: f64) -> SolverConfig {
        SolverConfig { sigma, m, half_width: 2.0, height: 2.0, horizon, nx: n, ny: n / 2, nt, ..Default::default() }
    }

    #[test]
    fn flat_rows_are_stationary() {
        let r = vec![0.3, 1.2, 2.0];
        assert_eq!(
            boundary_update(&r, &r, 0.01, 0.1, 0.7, 2.0).unwrap(),
            [0.3, 1.2, 2.0].iter().map(|&v| pow_m(root_m(v, 2.0), 2.0)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn linear_update_hits_row1_at_the_bound() {
        let sigma = 0.6;
        let dx: f64 = 0.05;
        let dt = dx.powf(sigma) / nu_sigma(sigma).unwrap();
        let new = boundary_update(&[1.0, 0.5], &[0.25, 0.75], dt, dx, sigma, 1.0).unwrap();
        assert!((new[0] - 0.25).abs() < 1e-14 && (new[1] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn large_negative_bracket_aborts() {
        let err = boundary_update(&[1.0], &[0.0], 10.0, 0.1, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::NegativeBracket { i: 0, .. }));
        // Rounding-size excursions are clamped.
        let dt = 0.1 * (1.0 + 1e-13);
        assert_eq!(boundary_update(&[1.0], &[0.0], dt, 0.1, 1.0, 1.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn zero_data_stays_zero() {
        let t = march(&cfg(0.5, 2.0, 16, 5, 0.1), &InitialData::Constant(0.0), SnapshotSchedule::All).unwrap();
        assert!(t.snapshots.iter().all(|(_, f)| f.values.iter().all(|v| *v == 0.0)));
        assert_eq!(t.snapshots.len(), 6);
    }

    #[test]
    fn initialize_bump_reaches_b_max() {
        let c = cfg(1.0, 2.0, 20, 1, 0.001);
        let m = Marcher::new(&c).unwrap();
        let data = InitialData::Bump { amplitude: 2.0, radius: 1.0, center: 0.0 };
        let f = data.trace_values(&m.grid).unwrap();
        let w0 = initialize(&m.op, &f, 2.0).unwrap();
        assert!((w0.max() - 4.0).abs() < 1e-12);
        assert_eq!(w0.argmax().1, 0);
    }

    #[test]
    fn rejects_negative_data() {
        let m = Marcher::new(&cfg(1.0, 1.0, 8, 1, 0.01)).unwrap();
        assert!(initialize(&m.op, &[1.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn constant_data_leaks_at_the_sides_first() {
        let c = cfg(1.0, 1.0, 8, 1, 0.01);
        let m = Marcher::new(&c).unwrap();
        let w0 = initialize(&m.op, &[1.0; 7], 1.0).unwrap();
        let w1 = step(&w0, &m.op, &c).unwrap();
        let drop: Vec<f64> = (1..8).map(|i| w0.get(i, 0) - w1.get(i, 0)).collect();
        assert!(drop.iter().all(|d| *d > 0.0));
        assert!(drop[0] > drop[3] && drop[6] > drop[3]);
    }

    #[test]
    fn trace_history_matches_snapshots() {
        let c = cfg(1.5, 2.0, 16, 8, 0.02);
        let t = march(&c, &InitialData::gaussian(), SnapshotSchedule::All).unwrap();
        for (j, (_, f)) in t.snapshots.iter().enumerate() {
            for (u, w) in t.trace_history[j].iter().zip(f.row(0)) {
                assert_eq!(*u, root_m(*w, 2.0));
            }
        }
    }

    #[test]
    fn csv_is_reproducible() {
        let c = cfg(0.5, 1.0, 8, 3, 0.01);
        let a = march(&c, &InitialData::gaussian(), SnapshotSchedule::Times(vec![0.0, 0.01])).unwrap();
        let b = march(&c, &InitialData::gaussian(), SnapshotSchedule::Times(vec![0.0, 0.01])).unwrap();
        assert_eq!(a.snapshots_csv(), b.snapshots_csv());
        assert_eq!(a.trace_csv(), b.trace_csv());
        assert_eq!(a.snapshots.len(), 2);
        assert!(a.trace_csv().starts_with("t,x,u\n0.0000000000000000e0,"));
    }

    #[test]
    fn geometric_schedule() {
        let s = SnapshotSchedule::Geometric { first: 0.01, ratio: 2.0 };
        assert_eq!(s.steps(100, 0.001).unwrap(), vec![10, 20, 40, 80]);
        assert!(SnapshotSchedule::Geometric { first: 0.0, ratio: 2.0 }.steps(10, 0.1).is_err());
    }

    #[test]
    fn cfl_violation_detected() {
        let c = cfg(1.0, 1.0, 16, 1, 1.0);
        assert!(matches!(march(&c, &InitialData::gaussian(), SnapshotSchedule::None), Err(Error::CflViolation { .. })));
    }
}
