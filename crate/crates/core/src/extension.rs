//! The discrete extension problem `L^{c,d} W = 0` on interior nodes with
//! Dirichlet data on the trace row and on the lateral boundary.

use std::fmt::Write as _;
use std::io;

use faer::linalg::solvers::Solve;
use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, NodeRegion};
use crate::stencil::StencilSpec;

const RESIDUAL_TOL: f64 = 1e-10;

/// Assembled operator over the `(I-1)(K-1)` interior unknowns, ordered by
/// row `k` then column `i`.
///
/// Rows are stored negated and scaled (see [`crate::stencil`]) so that the
/// diagonal is positive and `O(1)`: `A w = B g` where `g` holds boundary
/// values.
pub struct ExtensionOperator {
    pub grid: Grid,
    pub sigma: f64,
    pub stencil: StencilSpec,
    /// Interior couplings, CSR by unknown: `(unknown, coefficient)`.
    rows: Vec<Vec<(usize, f64)>>,
    /// Boundary couplings per unknown: `(node index, coefficient)`. These
    /// move to the right-hand side with their sign as stored.
    boundary: Vec<Vec<(usize, f64)>>,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for ExtensionOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExtensionOperator")
            .field("nx", &self.grid.nx)
            .field("ny", &self.grid.ny)
            .field("sigma", &self.sigma)
            .field("stencil", &self.stencil)
            .finish_non_exhaustive()
    }
}

/// Outcome of [`ExtensionOperator::verify_monotone_structure`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneReport {
    pub is_m_structure: bool,
    /// Unknown indices of rows that break the sign or dominance pattern.
    pub offending_rows: Vec<usize>,
    pub rows_checked: usize,
}

impl ExtensionOperator {
    pub fn assemble(grid: &Grid, sigma: f64, c: u32, d: u32) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 2.0) {
            return Err(Error::domain(format!("sigma must lie in (0, 2), got {sigma}")));
        }
        let stencil = StencilSpec::new(c, d)?;
        stencil.check_mesh(grid.nx, grid.ny)?;
        let (nx, ny) = (grid.nx, grid.ny);
        let n = grid.interior_count();
        let mut rows = Vec::with_capacity(n);
        let mut boundary = Vec::with_capacity(n);
        let mut triplets = Vec::with_capacity(n * 9);
        for k in 1..ny {
            for i in 1..nx {
                let row_idx = unknown(nx, i, k);
                let mut inner = Vec::new();
                let mut outer = Vec::new();
                for ((ii, kk), w) in stencil.row(i, k, nx, ny, sigma) {
                    if grid.region(ii, kk) == NodeRegion::Interior {
                        let col = unknown(nx, ii, kk);
                        inner.push((col, -w));
                        triplets.push(Triplet::new(row_idx, col, -w));
                    } else {
                        outer.push((grid.index(ii, kk), w));
                    }
                }
                inner.sort_by_key(|e| e.0);
                outer.sort_by_key(|e| e.0);
                rows.push(inner);
                boundary.push(outer);
            }
        }
        let matrix = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| Error::Solver { reason: format!("assembly failed: {e:?}"), condition_estimate: f64::NAN })?;
        let lu = matrix.sp_lu().map_err(|e| Error::Solver {
            reason: format!("sparse LU failed: {e:?}"),
            condition_estimate: f64::INFINITY,
        })?;
        Ok(Self { grid: grid.clone(), sigma, stencil, rows, boundary, lu })
    }

    pub fn unknowns(&self) -> usize {
        self.rows.len()
    }

    /// Right-hand side `B g` for a full node vector whose boundary entries
    /// hold the data (interior entries are ignored).
    pub fn rhs(&self, nodes: &[f64]) -> Vec<f64> {
        self.boundary.iter().map(|b| b.iter().map(|&(p, w)| w * nodes[p]).sum()).collect()
    }

    /// `A w` for a vector of interior unknowns.
    pub fn matvec(&self, w: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(j, a)| a * w[j]).sum()).collect()
    }

    fn lu_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut col = Col::<f64>::from_fn(b.len(), |i| b[i]);
        self.lu.solve_in_place(col.as_mut());
        (0..b.len()).map(|i| col[i]).collect()
    }

    fn lu_solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let mut col = Col::<f64>::from_fn(b.len(), |i| b[i]);
        self.lu.solve_transpose_in_place(col.as_mut());
        (0..b.len()).map(|i| col[i]).collect()
    }

    /// Solves `A w = rhs`, refining once if the residual check fails.
    pub fn solve_system(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let scale = inf_norm(rhs);
        let mut w = self.lu_solve(rhs);
        let mut r = residual(&self.matvec(&w), rhs);
        if inf_norm(&r) > RESIDUAL_TOL * scale {
            let delta = self.lu_solve(&r);
            w.iter_mut().zip(&delta).for_each(|(a, b)| *a -= b);
            r = residual(&self.matvec(&w), rhs);
        }
        let res = inf_norm(&r);
        if !(res <= RESIDUAL_TOL * scale) {
            return Err(Error::Solver {
                reason: format!("residual {res:e} exceeds {:e}", RESIDUAL_TOL * scale),
                condition_estimate: self.condition_estimate(),
            });
        }
        Ok(w)
    }

    /// Interior values for the given trace row (`I-1` values) and lateral
    /// data (in [`Grid::lateral_nodes`] order).
    pub fn solve_interior(&self, trace_row: &[f64], lateral: &[f64]) -> Result<Vec<f64>> {
        let g = &self.grid;
        if trace_row.len() != g.nx - 1 || lateral.len() != g.lateral_count() {
            return Err(Error::domain(format!(
                "boundary data sizes ({}, {}) do not match the mesh ({}, {})",
                trace_row.len(),
                lateral.len(),
                g.nx - 1,
                g.lateral_count()
            )));
        }
        if trace_row.iter().chain(lateral).any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite boundary data"));
        }
        let mut nodes = vec![0.0; g.node_count()];
        nodes[g.index(1, 0)..g.index(g.nx, 0)].copy_from_slice(trace_row);
        for ((i, k), &v) in g.lateral_nodes().zip(lateral) {
            nodes[g.index(i, k)] = v;
        }
        self.solve_system(&self.rhs(&nodes))
    }

    /// Overwrites the interior of `field` with the solution for the
    /// boundary values it already holds.
    pub fn solve_field(&self, field: &mut Field) -> Result<()> {
        let w = self.solve_system(&self.rhs(&field.values))?;
        self.scatter(&w, field);
        Ok(())
    }

    pub fn scatter(&self, w: &[f64], field: &mut Field) {
        let nx = self.grid.nx;
        for k in 1..self.grid.ny {
            let row = field.row_mut(k);
            row[1..nx].copy_from_slice(&w[(k - 1) * (nx - 1)..k * (nx - 1)]);
        }
    }

    /// Hager's estimate of `‖A‖_1 ‖A^{-1}‖_1`.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.unknowns();
        let mut col_sums = vec![0.0; n];
        for r in &self.rows {
            for &(j, a) in r {
                col_sums[j] += a.abs();
            }
        }
        let norm_a = col_sums.iter().copied().fold(0.0, f64::max);
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.lu_solve(&x);
            let new_est: f64 = y.iter().map(|v| v.abs()).sum();
            if !new_est.is_finite() {
                return f64::INFINITY;
            }
            let s: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.lu_solve_transpose(&s);
            let (jmax, zmax) =
                z.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |b, (j, v)| if v.abs() > b.1 { (j, v.abs()) } else { b });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            est = new_est;
            if zmax <= ztx {
                break;
            }
            x = vec![0.0; n];
            x[jmax] = 1.0;
        }
        norm_a * est
    }

    /// Checks the sign and dominance pattern sufficient for the discrete
    /// maximum principle.
    pub fn verify_monotone_structure(&self) -> MonotoneReport {
        let tol = 1e-14;
        let mut offending_rows = Vec::new();
        for (r, (inner, outer)) in self.rows.iter().zip(&self.boundary).enumerate() {
            let mut diag = 0.0;
            let mut off = 0.0;
            let mut ok = true;
            for &(j, a) in inner {
                if j == r {
                    diag = a;
                } else if a > tol {
                    ok = false;
                } else {
                    off += a.abs();
                }
            }
            // Boundary couplings sit on the right-hand side; in the
            // unnegated row they must be nonnegative like every neighbour.
            if outer.iter().any(|&(_, w)| w < -tol) {
                ok = false;
            }
            let coupled = outer.iter().any(|&(_, w)| w > tol);
            let slack = tol * diag.abs().max(1.0);
            let dominant = if coupled { diag - off > slack } else { diag - off >= -slack };
            if !(diag > 0.0 && ok && dominant) {
                offending_rows.push(r);
            }
        }
        MonotoneReport { is_m_structure: offending_rows.is_empty(), offending_rows, rows_checked: self.rows.len() }
    }

    /// Matrix-free application of the scaled operator (not negated) to a
    /// full node vector; one value per interior unknown.
    pub fn apply(&self, nodes: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let mut out = Vec::with_capacity(self.unknowns());
        for k in 1..g.ny {
            for i in 1..g.nx {
                let v = self
                    .stencil
                    .row(i, k, g.nx, g.ny, self.sigma)
                    .into_iter()
                    .map(|((ii, kk), w)| w * nodes[g.index(ii, kk)])
                    .sum();
                out.push(v);
            }
        }
        out
    }

    /// [`apply`](Self::apply) rescaled to approximate `L_σ v` itself.
    pub fn apply_physical(&self, nodes: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let h2 = g.dx * g.dx;
        let scaled = self.apply(nodes);
        scaled
            .into_iter()
            .enumerate()
            .map(|(p, v)| {
                let k = p / (g.nx - 1) + 1;
                v * g.ys[k].powf(1.0 - self.sigma) / h2
            })
            .collect()
    }

    /// Entries of `A` as `(row, col, value)`, sorted row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.rows.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v))).collect()
    }

    /// Coordinate-format dump: one `row col value` line per entry.
    pub fn write_matrix(&self, mut out: impl io::Write) -> Result<()> {
        let mut s = String::new();
        for (r, c, v) in self.triplets() {
            let _ = writeln!(s, "{r} {c} {v:.16e}");
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }
}

#[inline]
fn unknown(nx: usize, i: usize, k: usize) -> usize {
    (k - 1) * (nx - 1) + (i - 1)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn residual(aw: &[f64], rhs: &[f64]) -> Vec<f64> {
    aw.iter().zip(rhs).map(|(a, b)| a - b).collect()
}

/// Node of the maximum value, ties to the smallest `k` then `i`.
pub fn discrete_max_location(field: &Field) -> (usize, usize) {
    field.argmax()
}

/// Dense Gaussian elimination with partial pivoting. Used as a reference
/// on small meshes.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).expect("non-empty");
        if a[p][col] == 0.0 {
            return Err(Error::Solver { reason: "singular matrix".into(), condition_estimate: f64::INFINITY });
        }
        a.swap(col, p);
        b.swap(col, p);
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot = &upper[col];
        for (r, row) in lower.iter_mut().enumerate() {
            let f = row[col] / pivot[col];
            if f != 0.0 {
                for (x, &p) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= f * p;
                }
                b[col + 1 + r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

impl ExtensionOperator {
    /// `A` as a dense matrix, for reference solves on small meshes.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.unknowns();
        let mut m = vec![vec![0.0; n]; n];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[r][c] = v;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(n: usize, sigma: f64, c: u32, d: u32) -> ExtensionOperator {
        let g = Grid::from_extents(1.0, n, n);
        ExtensionOperator::assemble(&g, sigma, c, d).unwrap()
    }

    #[test]
    fn annihilates_constants() {
        for &(c, d) in &crate::stencil::SUPPORTED {
            let o = op(10, 0.7, c, d);
            let r = o.apply(&vec![3.5; o.grid.node_count()]);
            assert!(r.iter().all(|v| v.abs() <= 1e-12 * 3.5), "c={c} d={d}");
        }
    }

    #[test]
    fn linear_in_x_is_harmonic() {
        let o = op(8, 1.4, 2, 1);
        let g = &o.grid;
        let mut nodes = vec![0.0; g.node_count()];
        for k in 0..=g.ny {
            for i in 0..=g.nx {
                nodes[g.index(i, k)] = g.xs[i];
            }
        }
        assert!(o.apply(&nodes).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_data_gives_zero() {
        let o = op(8, 0.5, 2, 1);
        let w = o.solve_interior(&[0.0; 7], &vec![0.0; o.grid.lateral_count()]).unwrap();
        assert!(w.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn unit_trace_is_bounded_and_peaks_next_to_trace() {
        let o = op(6, 0.8, 2, 1);
        let w = o.solve_interior(&[1.0; 5], &vec![0.0; o.grid.lateral_count()]).unwrap();
        assert!(w.iter().all(|v| (0.0..=1.0).contains(v)));
        let mut f = Field::zeros(&o.grid);
        f.row_mut(0)[1..6].fill(1.0);
        o.scatter(&w, &mut f);
        let interior_max = w.iter().copied().fold(0.0, f64::max);
        let row1_max = f.row(1).iter().copied().fold(0.0, f64::max);
        assert_eq!(interior_max, row1_max);
        assert_eq!(discrete_max_location(&f).1, 0);
    }

    #[test]
    fn matches_dense_reference() {
        let o = op(6, 1.3, 2, 1);
        let trace: Vec<f64> = (1..6).map(|i| (i as f64 * 0.7).sin().abs()).collect();
        let lat = vec![0.0; o.grid.lateral_count()];
        let sparse = o.solve_interior(&trace, &lat).unwrap();
        let mut nodes = vec![0.0; o.grid.node_count()];
        nodes[1..6].copy_from_slice(&trace);
        let dense = dense_solve(o.to_dense(), o.rhs(&nodes)).unwrap();
        for (a, b) in sparse.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-3));
        }
    }

    #[test]
    fn repeated_solves_are_bitwise_identical() {
        let o = op(12, 0.5, 2, 1);
        let trace: Vec<f64> = (1..12).map(|i| i as f64).collect();
        let lat = vec![0.0; o.grid.lateral_count()];
        assert_eq!(o.solve_interior(&trace, &lat).unwrap(), o.solve_interior(&trace, &lat).unwrap());
    }

    #[test]
    fn default_stencil_has_m_structure() {
        for sigma in [0.1, 0.5, 1.0, 1.5, 1.95] {
            let r = op(8, sigma, 2, 1).verify_monotone_structure();
            assert!(r.is_m_structure, "sigma={sigma}: {:?}", r.offending_rows);
            assert_eq!(r.rows_checked, 49);
        }
        let tiny = op(2, 0.5, 2, 1).verify_monotone_structure();
        assert_eq!(tiny.rows_checked, 1);
    }

    #[test]
    fn wide_stencil_is_flagged() {
        let r = op(10, 0.5, 4, 4).verify_monotone_structure();
        assert!(!r.is_m_structure);
    }

    #[test]
    fn rejects_bad_requests() {
        let g = Grid::from_extents(1.0, 8, 8);
        assert!(matches!(ExtensionOperator::assemble(&g, 0.5, 1, 1), Err(Error::UnsupportedStencil { .. })));
        let g = Grid::from_extents(1.0, 4, 4);
        assert!(matches!(ExtensionOperator::assemble(&g, 0.5, 4, 4), Err(Error::MeshTooSmall(_))));
    }

    #[test]
    fn matrix_dump_is_sorted() {
        let o = op(4, 0.5, 2, 1);
        let mut buf = Vec::new();
        o.write_matrix(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let keys: Vec<(usize, usize)> = text
            .lines()
            .map(|l| {
                let mut it = l.split_whitespace();
                (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
            })
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(keys[0], (0, 0));
    }

    #[test]
    fn condition_estimate_is_finite() {
        let c = op(8, 0.5, 2, 1).condition_estimate();
        assert!(c.is_finite() && c >= 1.0);
    }
}
