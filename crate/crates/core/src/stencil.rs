//! Finite-difference weights for the pieces of the discrete extension
//! operator `L^{c,d} = y^{1-σ} Δ^c + (1-σ) y^{-σ} D_y^d`.
//!
//! All weights are on unit spacing. A row of the operator at node `(i, k)`
//! is stored as `Δ^c_unit + (1-σ)/k D^d_unit`; the physical value is that
//! row times `y_k^{1-σ} / dx^2`.

use crate::error::{Error, Result};

/// Fornberg's recursion: weights of derivatives `0..=max_deriv` at `z` for
/// the given nodes. `w[q][j]` multiplies `f(nodes[j])` in the `q`-th
/// derivative.
pub fn fornberg(z: f64, nodes: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// The `(c, d)` pairs the assembler knows how to build.
pub const SUPPORTED: [(u32, u32); 6] = [(2, 1), (2, 2), (2, 3), (3, 3), (3, 4), (4, 4)];

/// One-dimensional weights: `(node index, weight)`.
pub type Weights1d = Vec<(usize, f64)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StencilSpec {
    pub c: u32,
    pub d: u32,
}

impl Default for StencilSpec {
    fn default() -> Self {
        Self { c: 2, d: 1 }
    }
}

impl StencilSpec {
    pub fn new(c: u32, d: u32) -> Result<Self> {
        if SUPPORTED.contains(&(c, d)) {
            Ok(Self { c, d })
        } else {
            Err(Error::UnsupportedStencil { c, d })
        }
    }

    /// Smallest supported pair with at least the requested orders.
    pub fn covering(c: u32, d: u32) -> Result<Self> {
        SUPPORTED
            .iter()
            .filter(|&&(cc, dd)| cc >= c && dd >= d)
            .min_by_key(|&&(cc, dd)| (cc + dd, cc))
            .map(|&(c, d)| Self { c, d })
            .ok_or(Error::UnsupportedStencil { c, d })
    }

    pub fn is_default(&self) -> bool {
        (self.c, self.d) == (2, 1)
    }

    /// Smallest `(I, K)` on which every row can be built.
    pub fn min_mesh(&self) -> (usize, usize) {
        let lap = if self.c == 2 { 2 } else { self.c as usize + 1 };
        let first = match self.d {
            1 | 2 => 2,
            3 => 3,
            _ => 4,
        };
        (lap, lap.max(first))
    }

    pub fn check_mesh(&self, nx: usize, ny: usize) -> Result<()> {
        let (mi, mk) = self.min_mesh();
        if nx < mi || ny < mk {
            return Err(Error::MeshTooSmall(format!(
                "stencil (c={}, d={}) needs I >= {mi} and K >= {mk}, got I={nx}, K={ny}",
                self.c, self.d
            )));
        }
        Ok(())
    }

    /// Second-derivative weights at `center` on nodes `0..=last`.
    pub fn second(&self, center: usize, last: usize) -> Weights1d {
        let window = if self.c == 2 {
            (center - 1, 3)
        } else if center >= 2 && center + 2 <= last {
            (center - 2, 5)
        } else {
            shifted(center, self.c as usize + 2, last)
        };
        weights_on(center, window, 2)
    }

    /// First-derivative weights in `y` at row `k` of `0..=last`.
    pub fn first(&self, k: usize, last: usize) -> Weights1d {
        let window = match self.d {
            1 => (k, 2),
            2 => (k - 1, 3),
            3 => {
                if k + 2 <= last {
                    (k - 1, 4)
                } else {
                    (last - 3, 4)
                }
            }
            _ => {
                if k >= 2 && k + 2 <= last {
                    (k - 2, 5)
                } else {
                    shifted(k, 5, last)
                }
            }
        };
        weights_on(k, window, 1)
    }

    /// Scaled row at interior node `(i, k)`: `((i', k'), weight)` pairs,
    /// merged so each node appears once.
    pub fn row(&self, i: usize, k: usize, nx: usize, ny: usize, sigma: f64) -> Vec<((usize, usize), f64)> {
        let mut out: Vec<((usize, usize), f64)> = Vec::with_capacity(16);
        let mut push = |node: (usize, usize), w: f64| {
            if let Some(e) = out.iter_mut().find(|(n, _)| *n == node) {
                e.1 += w;
            } else {
                out.push((node, w));
            }
        };
        for (ii, w) in self.second(i, nx) {
            push((ii, k), w);
        }
        for (kk, w) in self.second(k, ny) {
            push((i, kk), w);
        }
        let drift = (1.0 - sigma) / k as f64;
        if drift != 0.0 {
            for (kk, w) in self.first(k, ny) {
                push((i, kk), drift * w);
            }
        }
        out
    }
}

fn shifted(center: usize, n: usize, last: usize) -> (usize, usize) {
    let start = center.saturating_sub(n / 2).min(last + 1 - n);
    (start, n)
}

fn weights_on(center: usize, (start, n): (usize, usize), deriv: usize) -> Weights1d {
    let nodes: Vec<f64> = (start..start + n).map(|j| j as f64).collect();
    let w = fornberg(center as f64, &nodes, deriv);
    (start..start + n).zip(w[deriv].iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn fornberg_classical_weights() {
        let w = fornberg(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!(close(w[2][0], 1.0) && close(w[2][1], -2.0) && close(w[2][2], 1.0));
        assert!(close(w[1][0], -0.5) && close(w[1][1], 0.0) && close(w[1][2], 0.5));
        let w = fornberg(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let want = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w[2].iter().zip(want) {
            assert!(close(*a, b));
        }
    }

    #[test]
    fn supported_set_and_covering() {
        assert!(StencilSpec::new(2, 1).is_ok());
        assert!(matches!(StencilSpec::new(1, 1), Err(Error::UnsupportedStencil { .. })));
        assert_eq!(StencilSpec::covering(1, 1).unwrap(), StencilSpec { c: 2, d: 1 });
        assert_eq!(StencilSpec::covering(1, 2).unwrap(), StencilSpec { c: 2, d: 2 });
        assert_eq!(StencilSpec::covering(2, 3).unwrap(), StencilSpec { c: 2, d: 3 });
        assert_eq!(StencilSpec::covering(3, 4).unwrap(), StencilSpec { c: 3, d: 4 });
        assert!(StencilSpec::covering(5, 1).is_err());
    }

    #[test]
    fn one_sided_windows_keep_exactness() {
        // A q-point rule for the p-th derivative is exact on polynomials of
        // degree q - 1.
        for &(c, d) in &SUPPORTED {
            let s = StencilSpec { c, d };
            let last = 8;
            for center in 1..last {
                let sec = s.second(center, last);
                let deg = sec.len() - 1;
                let p = |x: f64| x.powi(deg as i32);
                let approx: f64 = sec.iter().map(|&(j, w)| w * p(j as f64)).sum();
                let exact = (deg * (deg - 1)) as f64 * (center as f64).powi(deg as i32 - 2);
                assert!((approx - exact).abs() < 1e-8 * exact.abs().max(1.0), "c={c} center={center}");
                assert!(sec.iter().all(|&(j, _)| j <= last));

                let fst = s.first(center, last);
                let deg = fst.len() - 1;
                let approx: f64 = fst.iter().map(|&(j, w)| w * (j as f64).powi(deg as i32)).sum();
                let exact = deg as f64 * (center as f64).powi(deg as i32 - 1);
                assert!((approx - exact).abs() < 1e-8 * exact.abs().max(1.0), "d={d} center={center}");
            }
        }
    }

    #[test]
    fn default_row_matches_hand_weights() {
        let s = StencilSpec::default();
        let sigma = 0.4;
        let row = s.row(3, 2, 8, 8, sigma);
        let get = |n| row.iter().find(|(m, _)| *m == n).map(|e| e.1).unwrap();
        let drift = (1.0 - sigma) / 2.0;
        assert!(close(get((3, 2)), -4.0 - drift));
        assert!(close(get((3, 3)), 1.0 + drift));
        assert!(close(get((3, 1)), 1.0));
        assert!(close(get((2, 2)), 1.0));
        assert!(close(row.iter().map(|e| e.1).sum::<f64>(), 0.0));
    }

    #[test]
    fn mesh_size_requirements() {
        assert!(StencilSpec::default().check_mesh(2, 2).is_ok());
        assert!(StencilSpec { c: 4, d: 4 }.check_mesh(4, 4).is_err());
        assert!(StencilSpec { c: 4, d: 4 }.check_mesh(5, 5).is_ok());
        assert!(StencilSpec { c: 2, d: 3 }.check_mesh(4, 2).is_err());
    }
}
