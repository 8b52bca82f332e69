//! Uniform mesh of `[-X, X] x [0, Y]` and node-wise fields on it.

use crate::config::SolverConfig;
use crate::error::{Error, Result};

/// Which part of the extended domain a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRegion {
    Interior,
    /// The base `y = 0` where the trace lives (`0 < i < I`, `k = 0`).
    TraceBoundary,
    /// Sides `i = 0`, `i = I` and top `k = K`, where homogeneous Dirichlet
    /// data is imposed.
    LateralBoundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dx: f64,
    /// `I`
    pub nx: usize,
    /// `K`
    pub ny: usize,
    /// `x_i = i dx - X`, `i = 0..=I`
    pub xs: Vec<f64>,
    /// `y_k = k dx`, `k = 0..=K`
    pub ys: Vec<f64>,
}

impl Grid {
    pub fn new(cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self::from_extents(cfg.half_width, cfg.nx, cfg.ny))
    }

    /// Mesh with `I = nx`, `K = ny` and spacing `2X/I` in both directions.
    pub fn from_extents(half_width: f64, nx: usize, ny: usize) -> Self {
        let dx = 2.0 * half_width / nx as f64;
        let xs = (0..=nx).map(|i| if i == nx { half_width } else { i as f64 * dx - half_width }).collect();
        let ys = (0..=ny).map(|k| k as f64 * dx).collect();
        Self { dx, nx, ny, xs, ys }
    }

    pub fn region(&self, i: usize, k: usize) -> NodeRegion {
        if i == 0 || i == self.nx || k == self.ny {
            NodeRegion::LateralBoundary
        } else if k == 0 {
            NodeRegion::TraceBoundary
        } else {
            NodeRegion::Interior
        }
    }

    pub fn node_count(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn interior_count(&self) -> usize {
        (self.nx - 1) * (self.ny - 1)
    }

    /// Number of lateral (Γ_h) nodes: both sides including corners, plus the
    /// top row between them.
    pub fn lateral_count(&self) -> usize {
        2 * (self.ny + 1) + (self.nx - 1)
    }

    /// Lateral nodes in the canonical order used by boundary-data arrays:
    /// left side bottom to top, right side bottom to top, then the top row
    /// left to right.
    pub fn lateral_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let left = (0..=self.ny).map(|k| (0, k));
        let right = (0..=self.ny).map(move |k| (self.nx, k));
        let top = (1..self.nx).map(move |i| (i, self.ny));
        left.chain(right).chain(top)
    }

    /// Linear index into a [`Field`]'s value buffer.
    #[inline]
    pub fn index(&self, i: usize, k: usize) -> usize {
        k * (self.nx + 1) + i
    }
}

/// Values of the extended variable `w` on every mesh node at one time level.
///
/// Storage is row-major by `k` (rows of constant `y`), so `row(k)` is a
/// contiguous slice and `row(0)` is the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
    pub time_index: usize,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Self { nx: grid.nx, ny: grid.ny, values: vec![0.0; grid.node_count()], time_index: 0 }
    }

    pub fn from_values(grid: &Grid, values: Vec<f64>, time_index: usize) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::domain(format!("field needs {} values, got {}", grid.node_count(), values.len())));
        }
        Ok(Self { nx: grid.nx, ny: grid.ny, values, time_index })
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[k * (self.nx + 1) + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, k: usize, v: f64) {
        self.values[k * (self.nx + 1) + i] = v;
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.nx + 1;
        &self.values[k * w..(k + 1) * w]
    }

    pub fn row_mut(&mut self, k: usize) -> &mut [f64] {
        let w = self.nx + 1;
        &mut self.values[k * w..(k + 1) * w]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// First non-finite node, if any, as `(i, k)`.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        let w = self.nx + 1;
        self.values.iter().position(|v| !v.is_finite()).map(|p| (p % w, p / w))
    }

    /// Node of the maximum value; ties go to the smallest `k`, then the
    /// smallest `i`.
    pub fn argmax(&self) -> (usize, usize) {
        let w = self.nx + 1;
        let mut best = 0;
        for (p, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = p;
            }
        }
        (best % w, best / w)
    }
}
