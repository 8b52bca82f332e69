use fracpme_core as core;
use fracpme_core::{Error, SchemeMode};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_)
        | Error::Domain(_)
        | Error::UnsupportedStencil { .. }
        | Error::MeshTooSmall(_)
        | Error::CflViolation { .. }
        | Error::NonConvergentOrder { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_mode(mode: &str) -> PyResult<SchemeMode> {
    mode.parse().map_err(py_err)
}

#[pyfunction]
fn mu_sigma(sigma: f64) -> PyResult<f64> {
    core::mu_sigma(sigma).map_err(py_err)
}

#[pyfunction]
fn nu_sigma(sigma: f64) -> PyResult<f64> {
    core::nu_sigma(sigma).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (sigma, n = 1))]
fn riesz_constant(sigma: f64, n: u32) -> PyResult<f64> {
    core::riesz_constant(n, sigma).map_err(py_err)
}

#[pyfunction]
fn cfl_max_dt(m: f64, b_max: f64, sigma: f64, dx: f64) -> PyResult<f64> {
    core::cfl_max_dt(m, b_max, sigma, dx).map_err(py_err)
}

#[pyfunction]
fn stable_dt(m: f64, b_max: f64, sigma: f64, dx: f64) -> PyResult<f64> {
    core::stable_dt(m, b_max, sigma, dx).map_err(py_err)
}

#[pyfunction]
fn effective_order(sigma: f64, c: u32, d: u32) -> PyResult<f64> {
    core::effective_order(sigma, c, d).map_err(py_err)
}

#[pyfunction]
fn discrete_sigma_derivative(v0: f64, vy: f64, y: f64, sigma: f64) -> PyResult<f64> {
    core::discrete_sigma_derivative(v0, vy, y, sigma).map_err(py_err)
}

#[pyfunction]
fn normalized_sigma_derivative(v0: f64, vy: f64, y: f64, sigma: f64) -> PyResult<f64> {
    core::normalized_sigma_derivative(v0, vy, y, sigma).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (x, y, sigma, n = 1))]
fn poisson_kernel(x: f64, y: f64, sigma: f64, n: u32) -> PyResult<f64> {
    core::poisson_kernel(x, y, sigma, n).map_err(py_err)
}

/// Calls back into Python for every sample; the first failure is kept and
/// re-raised.
fn with_callable<T>(g: &Bound<'_, PyAny>, run: impl FnOnce(&dyn Fn(f64) -> f64) -> Result<T, Error>) -> PyResult<T> {
    let failure = std::cell::RefCell::new(None);
    let f = |t: f64| match g.call1((t,)).and_then(|v| v.extract::<f64>()) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let out = run(&f);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    out.map_err(py_err)
}

/// `(-Δ)^{σ/2} g (x)` by principal-value quadrature; `g` is a Python
/// callable.
#[pyfunction]
fn frac_laplacian_pv(g: &Bound<'_, PyAny>, x: f64, sigma: f64) -> PyResult<f64> {
    with_callable(g, |f| core::frac_laplacian_pv(f, x, sigma))
}

#[pyfunction]
fn poisson_extension(g: &Bound<'_, PyAny>, x: f64, y: f64, sigma: f64) -> PyResult<f64> {
    with_callable(g, |f| core::poisson_extension(f, x, y, sigma))
}

/// Fourier solution of the linear equation from `amplitude * exp(-(x/width)^2)`.
#[pyfunction]
fn gaussian_heat_solution(amplitude: f64, width: f64, x: f64, t: f64, sigma: f64) -> PyResult<f64> {
    core::fractional_heat_solution(core::oracles::gaussian_hat(amplitude, width), x, t, sigma).map_err(py_err)
}

/// `(alpha, beta)` of the source-type solution.
#[pyfunction]
#[pyo3(signature = (m, sigma, n = 1))]
fn barenblatt_exponents(m: f64, sigma: f64, n: u32) -> PyResult<(f64, f64)> {
    let e = core::barenblatt_exponents(n, m, sigma).map_err(py_err)?;
    Ok((e.alpha, e.beta))
}

#[pyfunction]
#[pyo3(signature = (half_width, horizon, m, sigma, constant = 1.0, n = 1))]
fn lateral_bound(half_width: f64, horizon: f64, m: f64, sigma: f64, constant: f64, n: u32) -> PyResult<f64> {
    core::lateral_bound(half_width, horizon, n, m, sigma, constant).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (dx, a, sigma, l = 1.0, n = 1))]
fn min_domain_half_width(dx: f64, a: f64, sigma: f64, l: f64, n: u32) -> PyResult<f64> {
    core::min_domain_half_width(dx, a, n, sigma, l).map_err(py_err)
}

#[pyfunction]
fn estimate_order(e1: f64, e2: f64, h1: f64, h2: f64) -> PyResult<f64> {
    core::estimate_order(e1, e2, h1, h2).map_err(py_err)
}

#[pyclass(frozen, get_all, name = "SchemeParams")]
struct PySchemeParams {
    a: f64,
    c: u32,
    d: Option<u32>,
    p: f64,
    breakpoint: bool,
    stencil: (u32, u32),
}

#[pymethods]
impl PySchemeParams {
    fn __repr__(&self) -> String {
        format!(
            "SchemeParams(a={}, c={}, d={:?}, p={}, breakpoint={}, stencil={:?})",
            self.a, self.c, self.d, self.p, self.breakpoint, self.stencil
        )
    }
}

/// `mode` is `practical`, `optimal` or `minimal:DELTA`.
#[pyfunction]
fn select_scheme_params(sigma: f64, mode: &str) -> PyResult<PySchemeParams> {
    let p = core::select_scheme_params(sigma, parse_mode(mode)?).map_err(py_err)?;
    Ok(PySchemeParams { a: p.a, c: p.c, d: p.d, p: p.p, breakpoint: p.breakpoint, stencil: (p.stencil.c, p.stencil.d) })
}

/// Table CSV and the list of deviations from the reference values.
#[pyfunction]
#[pyo3(signature = (sigmas = None, ys = None))]
fn run_sigma_table(sigmas: Option<Vec<f64>>, ys: Option<Vec<f64>>) -> PyResult<(String, Vec<String>)> {
    let sigmas = sigmas.unwrap_or_else(|| core::harness::TABLE_SIGMAS.to_vec());
    let ys = ys.unwrap_or_else(|| core::harness::TABLE_YS.to_vec());
    let out = core::run_sigma_table(&sigmas, &ys).map_err(py_err)?;
    Ok((out.csv, out.deviations))
}

/// `(name, measured, tolerance, passed)` per check.
#[pyfunction]
fn run_validate() -> PyResult<Vec<(String, f64, f64, bool)>> {
    let checks = core::run_validate(core::ValidateHooks::default()).map_err(py_err)?;
    Ok(checks.into_iter().map(|c| (c.name, c.measured, c.tolerance, c.passed)).collect())
}

#[pyclass(frozen, name = "ConvergenceReport")]
struct PyConvergenceReport(core::ConvergenceReport);

#[pymethods]
impl PyConvergenceReport {
    #[getter]
    fn errors(&self) -> Vec<f64> {
        self.0.rows.iter().map(|r| r.error_inf).collect()
    }

    #[getter]
    fn field_errors(&self) -> Vec<f64> {
        self.0.rows.iter().map(|r| r.error_field).collect()
    }

    #[getter]
    fn dx(&self) -> Vec<f64> {
        self.0.rows.iter().map(|r| r.dx).collect()
    }

    #[getter]
    fn orders(&self) -> Vec<Option<f64>> {
        self.0.rows.iter().map(|r| r.order).collect()
    }

    #[getter]
    fn target(&self) -> f64 {
        self.0.target
    }

    #[getter]
    fn reference(&self) -> String {
        self.0.reference.to_string()
    }

    fn final_order(&self) -> Option<f64> {
        self.0.final_order()
    }

    fn errors_strictly_decreasing(&self) -> bool {
        self.0.errors_strictly_decreasing()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    fn to_svg(&self) -> String {
        self.0.to_svg()
    }

    fn summary(&self) -> String {
        self.0.summary()
    }
}

#[pyfunction]
#[pyo3(signature = (sigma, m, mode, levels = 4))]
fn run_convergence(py: Python<'_>, sigma: f64, m: f64, mode: &str, levels: usize) -> PyResult<PyConvergenceReport> {
    let mode = parse_mode(mode)?;
    let base = core::StudyBase::default();
    py.detach(|| core::run_convergence(sigma, m, mode, levels, &base)).map(PyConvergenceReport).map_err(py_err)
}

#[pyclass(name = "SolverConfig")]
struct PySolverConfig {
    inner: core::SolverConfig,
    initial_data: core::InitialData,
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (sigma, m, half_width, height, horizon, nx, ny, nt, c = 2, d = 1, cfl_safety = 0.95, initial_data = "gaussian(1, 1)"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        sigma: f64,
        m: f64,
        half_width: f64,
        height: f64,
        horizon: f64,
        nx: usize,
        ny: usize,
        nt: usize,
        c: u32,
        d: u32,
        cfl_safety: f64,
        initial_data: &str,
    ) -> PyResult<Self> {
        let inner = core::SolverConfig { sigma, m, half_width, height, horizon, nx, ny, nt, c, d, cfl_safety };
        inner.validate().map_err(py_err)?;
        Ok(Self { inner, initial_data: initial_data.parse().map_err(py_err)? })
    }

    /// Parses the `key = value` run-file format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let run: core::RunConfig = text.parse().map_err(py_err)?;
        Ok(Self { inner: run.solver, initial_data: run.initial_data })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let run = core::RunConfig::from_file(path).map_err(py_err)?;
        Ok(Self { inner: run.solver, initial_data: run.initial_data })
    }

    fn to_config_string(&self) -> String {
        core::RunConfig { solver: self.inner.clone(), initial_data: self.initial_data.clone() }.to_config_string()
    }

    /// Smallest step count that satisfies the stability bound for this
    /// configuration's initial data.
    fn min_steps(&self) -> PyResult<usize> {
        let grid = core::Grid::new(&self.inner).map_err(py_err)?;
        let b = self.initial_data.b_max(&grid, self.inner.m).map_err(py_err)?;
        self.inner.min_steps(b).map_err(py_err)
    }

    #[getter]
    fn nt(&self) -> usize {
        self.inner.nt
    }

    #[setter]
    fn set_nt(&mut self, nt: usize) {
        self.inner.nt = nt;
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.dx()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt()
    }

    fn __repr__(&self) -> String {
        format!("SolverConfig({})", self.to_config_string().trim().replace('\n', ", "))
    }
}

#[pyclass(frozen, name = "Trajectory")]
struct PyTrajectory(core::Trajectory);

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn xs(&self) -> Vec<f64> {
        self.0.xs.clone()
    }

    #[getter]
    fn ys(&self) -> Vec<f64> {
        self.0.ys.clone()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt
    }

    #[getter]
    fn b_max(&self) -> f64 {
        self.0.b_max
    }

    /// `u = w^{1/m}` on the trace at the final time.
    fn final_trace(&self) -> Vec<f64> {
        self.0.final_trace().to_vec()
    }

    /// One trace row per time step.
    fn trace_history(&self) -> Vec<Vec<f64>> {
        self.0.trace_history.clone()
    }

    /// `(t, rows)` per captured step, rows indexed by `k`.
    fn snapshots(&self) -> Vec<(f64, Vec<Vec<f64>>)> {
        self.0.snapshots.iter().map(|(t, f)| (*t, (0..=f.ny).map(|k| f.row(k).to_vec()).collect())).collect()
    }

    fn trace_csv(&self) -> String {
        self.0.trace_csv()
    }

    fn snapshots_csv(&self) -> String {
        self.0.snapshots_csv()
    }
}

/// Marches `config` to its horizon, capturing fields at `snapshots`.
#[pyfunction]
#[pyo3(signature = (config, snapshots = None))]
fn march(py: Python<'_>, config: &PySolverConfig, snapshots: Option<Vec<f64>>) -> PyResult<PyTrajectory> {
    let schedule = snapshots.map_or(core::SnapshotSchedule::None, core::SnapshotSchedule::Times);
    let (cfg, data) = (config.inner.clone(), config.initial_data.clone());
    py.detach(|| core::march(&cfg, &data, schedule)).map(PyTrajectory).map_err(py_err)
}

#[pyclass(frozen, name = "ExtensionOperator")]
struct PyExtensionOperator(core::ExtensionOperator);

#[pymethods]
impl PyExtensionOperator {
    /// Operator on `[-X, X] x [0, K dx]` with `dx = 2X/I`.
    #[new]
    #[pyo3(signature = (half_width, nx, ny, sigma, c = 2, d = 1))]
    fn new(half_width: f64, nx: usize, ny: usize, sigma: f64, c: u32, d: u32) -> PyResult<Self> {
        let grid = core::Grid::from_extents(half_width, nx, ny);
        core::ExtensionOperator::assemble(&grid, sigma, c, d).map(Self).map_err(py_err)
    }

    #[getter]
    fn unknowns(&self) -> usize {
        self.0.unknowns()
    }

    /// Interior values in row-major `(k, i)` order for the given trace and
    /// zero lateral data.
    fn solve(&self, trace: Vec<f64>) -> PyResult<Vec<f64>> {
        let lateral = vec![0.0; self.0.grid.lateral_count()];
        self.0.solve_interior(&trace, &lateral).map_err(py_err)
    }

    fn is_monotone(&self) -> bool {
        self.0.verify_monotone_structure().is_m_structure
    }

    fn condition_estimate(&self) -> f64 {
        self.0.condition_estimate()
    }
}

#[pymodule]
#[pyo3(name = "fracpme")]
fn fracpme_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySchemeParams>()?;
    m.add_class::<PyConvergenceReport>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyExtensionOperator>()?;
    m.add_function(wrap_pyfunction!(mu_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(nu_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_constant, m)?)?;
    m.add_function(wrap_pyfunction!(cfl_max_dt, m)?)?;
    m.add_function(wrap_pyfunction!(stable_dt, m)?)?;
    m.add_function(wrap_pyfunction!(effective_order, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_sigma_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_sigma_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_extension, m)?)?;
    m.add_function(wrap_pyfunction!(frac_laplacian_pv, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_heat_solution, m)?)?;
    m.add_function(wrap_pyfunction!(barenblatt_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(lateral_bound, m)?)?;
    m.add_function(wrap_pyfunction!(min_domain_half_width, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_order, m)?)?;
    m.add_function(wrap_pyfunction!(select_scheme_params, m)?)?;
    m.add_function(wrap_pyfunction!(run_sigma_table, m)?)?;
    m.add_function(wrap_pyfunction!(run_validate, m)?)?;
    m.add_function(wrap_pyfunction!(run_convergence, m)?)?;
    m.add_function(wrap_pyfunction!(march, m)?)?;
    Ok(())
}
