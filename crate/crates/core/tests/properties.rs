use std::f64::consts::FRAC_PI_2;

use fracpme::harness::target_order;
use fracpme::quadrature::{integrate, QuadSettings};
use fracpme::{
    barenblatt_exponents, boundary_update, cfl_max_dt, discrete_sigma_derivative, effective_order, estimate_order,
    mu_sigma, nu_sigma, poisson_kernel, run_convergence, select_scheme_params, stable_dt, ExtensionOperator, Grid,
    InitialData, MarchOptions, Marcher, SchemeMode, SnapshotSchedule, SolverConfig, StudyBase,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn nu_is_sigma_times_mu() {
    for j in 1..=50 {
        let sigma = 2.0 * j as f64 / 51.0;
        let (mu, nu) = (mu_sigma(sigma).unwrap(), nu_sigma(sigma).unwrap());
        assert_eq!(nu, sigma * mu);
        assert!(mu.is_finite() && mu > 0.0 && nu.is_finite() && nu > 0.0);
    }
}

#[test]
fn poisson_kernel_has_unit_mass() {
    for sigma in [0.3, 0.5, 1.0, 1.5, 1.9] {
        for y in [0.1, 1.0, 10.0] {
            // x = y cot φ with φ = (π/2) s^{1/σ} maps the half line onto
            // s in (0, 1) and removes the tail singularity.
            let half = integrate(
                |s: f64| {
                    let phi = FRAC_PI_2 * s.powf(1.0 / sigma);
                    let dphi = FRAC_PI_2 / sigma * s.powf(1.0 / sigma - 1.0);
                    poisson_kernel(y / phi.tan(), y, sigma, 1).unwrap() * y / phi.sin().powi(2) * dphi
                },
                0.0,
                1.0,
                QuadSettings { abs_tol: 1e-11, rel_tol: 1e-12, max_intervals: 20_000 },
            )
            .unwrap();
            assert!((2.0 * half.value - 1.0).abs() < 1e-8, "sigma={sigma} y={y}: {}", 2.0 * half.value);
        }
    }
}

proptest! {
    #[test]
    fn cfl_bound_monotone(m in 1.01f64..4.0, b in 0.1f64..5.0, db in 0.01f64..2.0,
                          sigma in 0.05f64..1.95, dx in 1e-3f64..0.5, f in 1.01f64..3.0) {
        let base = cfl_max_dt(m, b, sigma, dx).unwrap();
        prop_assert!(cfl_max_dt(m, b, sigma, dx * f).unwrap() > base);
        prop_assert!(cfl_max_dt(m, b + db, sigma, dx).unwrap() < base);
    }

    #[test]
    fn quotient_is_linear(v0 in -5.0f64..5.0, vy in -5.0f64..5.0, w0 in -5.0f64..5.0, wy in -5.0f64..5.0,
                          a in -3.0f64..3.0, b in -3.0f64..3.0, y in 1e-3f64..2.0, sigma in 0.05f64..1.95) {
        let f = |p: f64, q: f64| discrete_sigma_derivative(p, q, y, sigma).unwrap();
        let lhs = f(a * v0 + b * w0, a * vy + b * wy);
        let rhs = a * f(v0, vy) + b * f(w0, wy);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs())));
    }

    #[test]
    fn quotient_sign(v0 in -5.0f64..5.0, gap in 1e-6f64..5.0, y in 1e-3f64..2.0, sigma in 0.05f64..1.95) {
        prop_assert!(discrete_sigma_derivative(v0, v0 + gap, y, sigma).unwrap() > 0.0);
        prop_assert!(discrete_sigma_derivative(v0, v0 - gap, y, sigma).unwrap() < 0.0);
    }

    #[test]
    fn barenblatt_identity(n in 1u32..4, m in 1.0f64..6.0, sigma in 0.01f64..1.99) {
        let e = barenblatt_exponents(n, m, sigma).unwrap();
        let lhs = -e.alpha + e.beta * (f64::from(n) + sigma);
        prop_assert!((lhs - e.beta * sigma).abs() <= 1e-15);
    }

    #[test]
    fn order_estimate_scale_invariant(e1 in 1e-8f64..1.0, e2 in 1e-8f64..1.0, lambda in 1e-3f64..1e3, h in 1e-3f64..1.0) {
        let a = estimate_order(e1, e2, 2.0 * h, h).unwrap();
        let b = estimate_order(lambda * e1, lambda * e2, 2.0 * h, h).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn scheme_params_meet_mode_bounds(sigma in 0.01f64..1.99, delta in 0.01f64..1.0, pick in 0usize..3) {
        let mode = [SchemeMode::Optimal, SchemeMode::Practical, SchemeMode::Minimal(delta)][pick];
        let p = select_scheme_params(sigma, mode).unwrap();
        let bound = match mode {
            SchemeMode::Optimal if sigma <= 1.0 => 2.0 * (2.0 - sigma),
            SchemeMode::Practical if sigma <= 1.0 => 2.0 * sigma,
            SchemeMode::Optimal | SchemeMode::Practical => 2.0,
            SchemeMode::Minimal(d) => sigma + d,
        };
        prop_assert!(p.a >= bound - 1e-15);
        prop_assert!(p.p >= sigma);
        prop_assert!(target_order(sigma, mode, &p) <= 2.0 - sigma);
        // dt = C dx^p stays under the stable step C' dx^σ on a refinement ladder.
        for k in 1..12 {
            let dx = 2f64.powi(-k);
            let stable = stable_dt(2.0, 1.0, sigma, dx).unwrap();
            let rule = stable_dt(2.0, 1.0, sigma, 1.0).unwrap() * dx.powf(p.p);
            prop_assert!(rule <= stable * (1.0 + 1e-12));
        }
    }
}

#[test]
fn boundary_update_stays_in_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let sigma = rng.gen_range(0.05..1.95);
        let m = rng.gen_range(1.0..4.0);
        let b: f64 = rng.gen_range(0.1..3.0);
        let dx = rng.gen_range(0.01..0.5);
        let n = rng.gen_range(1..20);
        let row0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=b)).collect();
        let row1: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=b)).collect();
        let dt = rng.gen_range(0.0..=1.0) * stable_dt(m, b, sigma, dx).unwrap();
        let out = boundary_update(&row0, &row1, dt, dx, sigma, m).unwrap();
        for v in out {
            assert!(v >= 0.0 && v <= b * (1.0 + 1e-12), "{v} outside [0, {b}]");
        }
    }
}

#[test]
fn elliptic_solve_obeys_maximum_principle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..200 {
        let sigma = [0.3, 0.5, 1.0, 1.5, 1.9][trial % 5];
        let n = [8, 16, 32, 64][trial % 4];
        let grid = Grid::from_extents(1.0, n, n);
        let op = ExtensionOperator::assemble(&grid, sigma, 2, 1).unwrap();
        let trace: Vec<f64> = (1..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let w = op.solve_interior(&trace, &vec![0.0; grid.lateral_count()]).unwrap();
        let top = trace.iter().cloned().fold(0.0, f64::max);
        let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(lo >= -1e-10, "min {lo}");
        assert!(hi <= top + 1e-10, "interior max {hi} above trace max {top}");
    }
}

#[test]
fn trace_perturbation_is_not_amplified() {
    // The solve is linear and monotone, so a trace perturbation of size ε
    // moves the interior by at most ε at every resolution.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for sigma in [0.5, 1.0, 1.5] {
        for n in [16, 32, 64] {
            let grid = Grid::from_extents(2.0, n, n / 2);
            let op = ExtensionOperator::assemble(&grid, sigma, 2, 1).unwrap();
            let lateral = vec![0.0; grid.lateral_count()];
            let trace: Vec<f64> = (1..n).map(|i| (-(grid.xs[i]).powi(2)).exp()).collect();
            let eps = 1e-3;
            let bumped: Vec<f64> = trace.iter().map(|v| v + rng.gen_range(-eps..eps)).collect();
            let a = op.solve_interior(&trace, &lateral).unwrap();
            let b = op.solve_interior(&bumped, &lateral).unwrap();
            let change = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(change <= eps * (1.0 + 1e-9), "sigma={sigma} I={n}: {change}");
        }
    }
}

fn residual(sigma: f64, c: u32, d: u32, n: usize) -> f64 {
    let grid = Grid::from_extents(1.0, n, n / 2);
    let op = ExtensionOperator::assemble(&grid, sigma, c, d).unwrap();
    let w = |x: f64, y: f64| x.cos() * (-2.0 * y).exp();
    let mut nodes = vec![0.0; grid.node_count()];
    for k in 0..=grid.ny {
        for i in 0..=grid.nx {
            nodes[grid.index(i, k)] = w(grid.xs[i], grid.ys[k]);
        }
    }
    let approx = op.apply_physical(&nodes);
    let mut worst: f64 = 0.0;
    for k in 1..grid.ny {
        for i in 1..grid.nx {
            let (x, y) = (grid.xs[i], grid.ys[k]);
            // y^{1-σ} (Δw + (1-σ)/y w_y) for w = cos x e^{-2y}
            let exact = y.powf(1.0 - sigma) * w(x, y) * (3.0 - 2.0 * (1.0 - sigma) / y);
            worst = worst.max((approx[(k - 1) * (grid.nx - 1) + i - 1] - exact).abs());
        }
    }
    worst
}

#[test]
fn truncation_order_matches_effective_order() {
    for (c, d) in [(2, 1), (2, 2)] {
        for sigma in [0.5, 1.0, 1.5] {
            let Ok(expected) = effective_order(sigma, c, d) else {
                continue;
            };
            let (e1, e2) = (residual(sigma, c, d, 64), residual(sigma, c, d, 128));
            let observed = estimate_order(e1, e2, 2.0 / 64.0, 2.0 / 128.0).unwrap();
            assert!((observed - expected).abs() <= 0.2, "({c},{d}) sigma={sigma}: {observed} vs {expected}");
        }
    }
}

fn bump_run(data: &InitialData, cfg: &SolverConfig) -> Vec<fracpme::Field> {
    let marcher = Marcher::new(cfg).unwrap();
    let f = data.trace_values(&marcher.grid).unwrap();
    let tr = marcher.run(&f, &MarchOptions::new(SnapshotSchedule::All)).unwrap();
    tr.snapshots.into_iter().map(|(_, f)| f).collect()
}

#[test]
fn update_preserves_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..12 {
        let sigma = [0.3, 1.0, 1.7][trial % 3];
        let m = [1.0, 2.0, 3.0][trial % 3];
        let n = 24;
        let mut cfg = SolverConfig {
            sigma,
            m,
            half_width: 2.0,
            height: 2.0,
            horizon: 0.1,
            nx: n,
            ny: n / 2,
            ..SolverConfig::default()
        };
        let low: Vec<f64> = (1..n).map(|_| rng.gen_range(0.0..0.5)).collect();
        let high: Vec<f64> = low.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
        let b = high.iter().map(|v| v.powf(m)).fold(0.0, f64::max);
        cfg.nt = cfg.min_steps(b).unwrap();
        let a = bump_run(&InitialData::Samples(low), &cfg);
        let c = bump_run(&InitialData::Samples(high), &cfg);
        for (fa, fc) in a.iter().zip(&c) {
            for (x, y) in fa.values.iter().zip(&fc.values) {
                assert!(*x <= y + 1e-12, "trial {trial}: {x} > {y}");
            }
        }
    }
}

#[test]
fn lateral_boundary_stays_zero() {
    let cfg = SolverConfig { sigma: 0.8, m: 2.0, nx: 32, ny: 16, horizon: 0.2, nt: 200, ..SolverConfig::default() };
    let data = InitialData::Constant(0.7);
    let marcher = Marcher::new(&cfg).unwrap();
    let f = data.trace_values(&marcher.grid).unwrap();
    let tr = marcher.run(&f, &MarchOptions::new(SnapshotSchedule::All)).unwrap();
    for (_, field) in &tr.snapshots {
        for (i, k) in marcher.grid.lateral_nodes() {
            assert_eq!(field.get(i, k).to_bits(), 0.0f64.to_bits());
        }
    }
}

#[test]
fn studies_do_not_depend_on_thread_count() {
    let base = StudyBase::default();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_convergence(0.7, 2.0, SchemeMode::Practical, 3, &base).unwrap().to_csv())
    };
    assert_eq!(run(1), run(4));
}
