//! Run configuration and the flat `key = value` configuration file.
//!
//! ```text
//! # lines starting with '#' are comments
//! sigma = 1.0
//! m = 2
//! X = 4        # half width of the x interval [-X, X]
//! Y = 4        # height of the extension
//! T = 0.5
//! I = 64
//! K = 32
//! J = 100
//! c = 2
//! d = 1
//! cfl_safety = 0.95
//! initial_data = gaussian(1.0, 1.0)
//! ```
//!
//! Every key except `c`, `d` and `cfl_safety` is required. `initial_data` is
//! either a preset (`gaussian(amp, width)`, `bump(amp, radius, center)`,
//! `constant(value)`) or an inline list of samples `[f_0, ..., f_I]` on all
//! `I + 1` nodes (or `[f_1, ..., f_{I-1}]` on the interior trace nodes).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::constants::{nu_sigma, stable_dt};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::special::pow_m;

/// Default fraction of the stability bound used when none is configured.
pub const DEFAULT_CFL_SAFETY: f64 = 0.95;

/// All scheme parameters of a bounded-domain run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub sigma: f64,
    pub m: f64,
    /// Half width `X` of the x interval `[-X, X]`.
    pub half_width: f64,
    /// Height `Y` of the extension domain.
    pub height: f64,
    /// Final time `T`.
    pub horizon: f64,
    /// Number of x steps `I`.
    pub nx: usize,
    /// Number of y steps `K`.
    pub ny: usize,
    /// Number of time steps `J`.
    pub nt: usize,
    /// Order of the Laplacian stencil.
    pub c: u32,
    /// Order of the first-derivative stencil.
    pub d: u32,
    pub cfl_safety: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            m: 1.0,
            half_width: 4.0,
            height: 4.0,
            horizon: 0.1,
            nx: 32,
            ny: 16,
            nt: 10,
            c: 2,
            d: 1,
            cfl_safety: DEFAULT_CFL_SAFETY,
        }
    }
}

impl SolverConfig {
    /// Checks every structural invariant; the CFL condition needs `b_max`
    /// and is checked separately by [`SolverConfig::check_cfl`].
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        if !(self.sigma > 0.0 && self.sigma < 2.0) {
            return Err(Error::config(format!("sigma must lie in (0, 2), got {}", self.sigma)));
        }
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return Err(Error::config(format!("m must be >= 1, got {}", self.m)));
        }
        positive("X", self.half_width)?;
        positive("Y", self.height)?;
        positive("T", self.horizon)?;
        if self.nx < 2 || self.ny < 2 || self.nt < 1 {
            return Err(Error::config(format!(
                "need I >= 2, K >= 2, J >= 1 (got I={}, K={}, J={})",
                self.nx, self.ny, self.nt
            )));
        }
        if self.c == 0 || self.d == 0 {
            return Err(Error::config("stencil orders c and d must be positive"));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::config(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        let (dx, dy) = (self.dx(), self.dy());
        if ((dx - dy) / dx).abs() > 1e-12 {
            return Err(Error::config(format!("mesh must be isotropic: dx = 2X/I = {dx} but dy = Y/K = {dy}")));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.height / self.ny as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    /// Largest admissible step for this mesh and data bound, already scaled
    /// by `cfl_safety`.
    pub fn admissible_dt(&self, b_max: f64) -> Result<f64> {
        Ok(self.cfl_safety * stable_dt(self.m, b_max, self.sigma, self.dx())?)
    }

    /// Fails with [`Error::CflViolation`] unless `T/J` respects the
    /// stability bound.
    pub fn check_cfl(&self, b_max: f64) -> Result<()> {
        let max_dt = self.admissible_dt(b_max)?;
        let dt = self.dt();
        // Relative slack for the round trip dt -> J -> T/J.
        if dt > max_dt * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, max_dt });
        }
        Ok(())
    }

    /// Ratio `ν_σ dt / dx^σ` that multiplies the σ-derivative quotient.
    pub fn update_ratio(&self) -> Result<f64> {
        Ok(nu_sigma(self.sigma)? * self.dt() / self.dx().powf(self.sigma))
    }

    /// Smallest `J` whose step respects the stability bound.
    pub fn min_steps(&self, b_max: f64) -> Result<usize> {
        let max_dt = self.admissible_dt(b_max)?;
        if max_dt.is_infinite() {
            return Ok(1);
        }
        Ok(((self.horizon / max_dt).ceil() as usize).max(1))
    }
}

/// Nonnegative initial data `f` on the trace.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `amplitude * exp(-(x/width)^2)`
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    /// Smooth compactly supported bump with peak `amplitude` at `center`.
    Bump {
        amplitude: f64,
        radius: f64,
        center: f64,
    },
    Constant(f64),
    /// Samples on all `I + 1` x-nodes or on the `I - 1` interior trace nodes.
    Samples(Vec<f64>),
}

impl InitialData {
    pub fn gaussian() -> Self {
        InitialData::Gaussian { amplitude: 1.0, width: 1.0 }
    }

    /// Point value of an analytic preset; `None` for sampled data.
    pub fn eval(&self, x: f64) -> Option<f64> {
        match *self {
            InitialData::Gaussian { amplitude, width } => Some(amplitude * (-(x / width).powi(2)).exp()),
            InitialData::Bump { amplitude, radius, center } => {
                let r = (x - center) / radius;
                if r.abs() < 1.0 {
                    Some(amplitude * (1.0 - 1.0 / (1.0 - r * r)).exp())
                } else {
                    Some(0.0)
                }
            }
            InitialData::Constant(v) => Some(v),
            InitialData::Samples(_) => None,
        }
    }

    /// Values of `f` on the interior trace nodes `x_1 .. x_{I-1}`.
    pub fn trace_values(&self, grid: &Grid) -> Result<Vec<f64>> {
        let n = grid.nx;
        let values: Vec<f64> = match self {
            InitialData::Samples(s) if s.len() == n + 1 => s[1..n].to_vec(),
            InitialData::Samples(s) if s.len() == n - 1 => s.clone(),
            InitialData::Samples(s) => {
                return Err(Error::config(format!(
                    "inline initial data has {} samples; expected I+1 = {} or I-1 = {}",
                    s.len(),
                    n + 1,
                    n - 1
                )))
            }
            analytic => (1..n).map(|i| analytic.eval(grid.xs[i]).unwrap()).collect(),
        };
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::config(format!("initial data must be finite and nonnegative, found {bad}")));
        }
        Ok(values)
    }

    /// `b_max = max f^m` over the trace nodes.
    pub fn b_max(&self, grid: &Grid, m: f64) -> Result<f64> {
        Ok(self.trace_values(grid)?.iter().map(|&f| pow_m(f, m)).fold(0.0, f64::max))
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Gaussian { amplitude, width } => write!(f, "gaussian({amplitude}, {width})"),
            InitialData::Bump { amplitude, radius, center } => {
                write!(f, "bump({amplitude}, {radius}, {center})")
            }
            InitialData::Constant(v) => write!(f, "constant({v})"),
            InitialData::Samples(s) => {
                let body: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                write!(f, "[{}]", body.join(", "))
            }
        }
    }
}

impl FromStr for InitialData {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix('[') {
            let body = body.strip_suffix(']').ok_or_else(|| Error::config("unterminated sample list"))?;
            let samples = parse_numbers(body)?;
            if samples.is_empty() {
                return Err(Error::config("empty sample list"));
            }
            return Ok(InitialData::Samples(samples));
        }
        let (name, args) = match s.find('(') {
            Some(open) => {
                let inner =
                    s[open + 1..].strip_suffix(')').ok_or_else(|| Error::config(format!("malformed preset `{s}`")))?;
                (s[..open].trim(), parse_numbers(inner)?)
            }
            None => (s, Vec::new()),
        };
        let arg = |idx: usize, default: f64| args.get(idx).copied().unwrap_or(default);
        let max_args = match name {
            "gaussian" => 2,
            "bump" => 3,
            "constant" => 1,
            other => return Err(Error::config(format!("unknown initial data preset `{other}`"))),
        };
        if args.len() > max_args {
            return Err(Error::config(format!("too many arguments for `{name}`")));
        }
        let data = match name {
            "gaussian" => InitialData::Gaussian { amplitude: arg(0, 1.0), width: arg(1, 1.0) },
            "bump" => InitialData::Bump { amplitude: arg(0, 1.0), radius: arg(1, 1.0), center: arg(2, 0.0) },
            _ => InitialData::Constant(arg(0, 1.0)),
        };
        match data {
            InitialData::Gaussian { amplitude, width } if amplitude < 0.0 || width <= 0.0 => {
                Err(Error::config("gaussian needs amplitude >= 0 and width > 0"))
            }
            InitialData::Bump { amplitude, radius, .. } if amplitude < 0.0 || radius <= 0.0 => {
                Err(Error::config("bump needs amplitude >= 0 and radius > 0"))
            }
            InitialData::Constant(v) if v < 0.0 => Err(Error::config("constant data must be >= 0")),
            ok => Ok(ok),
        }
    }
}

fn parse_numbers(body: &str) -> Result<Vec<f64>> {
    body.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::config(format!("cannot parse number `{t}`"))))
        .collect()
}

/// A solver configuration together with its initial data, as read from a
/// configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub initial_data: InitialData,
}

const KNOWN_KEYS: [&str; 12] = ["sigma", "m", "X", "Y", "T", "I", "K", "J", "c", "d", "cfl_safety", "initial_data"];

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    /// Renders the configuration back into the file format.
    pub fn to_config_string(&self) -> String {
        let s = &self.solver;
        format!(
            "sigma = {}\nm = {}\nX = {}\nY = {}\nT = {}\nI = {}\nK = {}\nJ = {}\nc = {}\nd = {}\ncfl_safety = {}\ninitial_data = {}\n",
            s.sigma, s.m, s.half_width, s.height, s.horizon, s.nx, s.ny, s.nt, s.c, s.d,
            s.cfl_safety, self.initial_data
        )
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<&str, &str> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::config(format!("line {}: unknown key `{key}`", lineno + 1)));
            }
            if entries.insert(key, value).is_some() {
                return Err(Error::config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }

        fn required<'a>(entries: &BTreeMap<&str, &'a str>, key: &str) -> Result<&'a str> {
            entries.get(key).copied().ok_or_else(|| Error::config(format!("missing key `{key}`")))
        }
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::config(format!("invalid value `{v}` for `{key}`")))
        }

        let solver = SolverConfig {
            sigma: num("sigma", required(&entries, "sigma")?)?,
            m: num("m", required(&entries, "m")?)?,
            half_width: num("X", required(&entries, "X")?)?,
            height: num("Y", required(&entries, "Y")?)?,
            horizon: num("T", required(&entries, "T")?)?,
            nx: num("I", required(&entries, "I")?)?,
            ny: num("K", required(&entries, "K")?)?,
            nt: num("J", required(&entries, "J")?)?,
            c: entries.get("c").map_or(Ok(2), |v| num("c", v))?,
            d: entries.get("d").map_or(Ok(1), |v| num("d", v))?,
            cfl_safety: entries.get("cfl_safety").map_or(Ok(DEFAULT_CFL_SAFETY), |v| num("cfl_safety", v))?,
        };
        solver.validate()?;
        let initial_data = required(&entries, "initial_data")?.parse()?;
        Ok(RunConfig { solver, initial_data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# desk run
sigma = 0.5
m = 2
X = 4
Y = 4
T = 0.25
I = 32
K = 16
J = 40
initial_data = bump(2, 1.5)   # peak 2
";

    #[test]
    fn parses_sample_file() {
        let cfg: RunConfig = SAMPLE.parse().unwrap();
        assert_eq!(cfg.solver.sigma, 0.5);
        assert_eq!(cfg.solver.nx, 32);
        assert_eq!((cfg.solver.c, cfg.solver.d), (2, 1));
        assert_eq!(cfg.solver.cfl_safety, DEFAULT_CFL_SAFETY);
        assert_eq!(cfg.initial_data, InitialData::Bump { amplitude: 2.0, radius: 1.5, center: 0.0 });
    }

    #[test]
    fn round_trips_through_text() {
        let cfg: RunConfig = SAMPLE.parse().unwrap();
        let again: RunConfig = cfg.to_config_string().parse().unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_and_duplicate_keys_are_errors() {
        let bad = format!("{SAMPLE}tolerance = 3\n");
        assert!(matches!(bad.parse::<RunConfig>(), Err(Error::Config(_))));
        let dup = format!("{SAMPLE}m = 3\n");
        assert!(matches!(dup.parse::<RunConfig>(), Err(Error::Config(_))));
        let missing = SAMPLE.replace("J = 40\n", "");
        assert!(missing.parse::<RunConfig>().is_err());
    }

    #[test]
    fn anisotropic_mesh_rejected() {
        let bad = SAMPLE.replace("K = 16", "K = 20");
        let err = bad.parse::<RunConfig>().unwrap_err();
        assert!(err.to_string().contains("isotropic"), "{err}");
    }

    #[test]
    fn parameter_ranges_enforced() {
        for (from, to) in [("sigma = 0.5", "sigma = 2"), ("m = 2", "m = 0.5"), ("X = 4", "X = -1")] {
            assert!(SAMPLE.replace(from, to).parse::<RunConfig>().is_err(), "{to}");
        }
    }

    #[test]
    fn inline_samples() {
        let data: InitialData = "[0, 1, 2.5, 1, 0]".parse().unwrap();
        let cfg = SolverConfig { nx: 4, ny: 2, half_width: 1.0, height: 1.0, ..Default::default() };
        let grid = Grid::new(&cfg).unwrap();
        assert_eq!(data.trace_values(&grid).unwrap(), vec![1.0, 2.5, 1.0]);
        assert!((data.b_max(&grid, 2.0).unwrap() - 6.25).abs() < 1e-14);
        let interior: InitialData = "[1, 2, 3]".parse().unwrap();
        assert_eq!(interior.trace_values(&grid).unwrap(), vec![1.0, 2.0, 3.0]);
        let wrong: InitialData = "[1, 2]".parse().unwrap();
        assert!(wrong.trace_values(&grid).is_err());
        let negative: InitialData = "[1, -2, 3]".parse().unwrap();
        assert!(negative.trace_values(&grid).is_err());
    }

    #[test]
    fn presets_parse_and_evaluate() {
        let g: InitialData = "gaussian".parse().unwrap();
        assert_eq!(g.eval(0.0), Some(1.0));
        let b: InitialData = "bump(2, 1, 0.5)".parse().unwrap();
        assert_eq!(b.eval(0.5), Some(2.0));
        assert_eq!(b.eval(1.6), Some(0.0));
        assert!("wave(1)".parse::<InitialData>().is_err());
        assert!("constant(-1)".parse::<InitialData>().is_err());
    }

    #[test]
    fn cfl_check_uses_safety_fraction() {
        let cfg = SolverConfig { sigma: 1.0, m: 1.0, nt: 1, horizon: 0.25, ..Default::default() };
        // dx = 0.25, admissible = 0.95 * 0.25 < dt = 0.25
        assert!(matches!(cfg.check_cfl(1.0), Err(Error::CflViolation { .. })));
        let ok = SolverConfig { nt: 2, ..cfg.clone() };
        assert!(ok.check_cfl(1.0).is_ok());
        assert_eq!(cfg.min_steps(1.0).unwrap(), 2);
    }
}
