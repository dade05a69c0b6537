//! Schnorr–Euchner enumeration of `‖z·G − y‖² ≤ r²` with optional per-coordinate box bounds.

use std::sync::atomic::{AtomicU64, Ordering};

use super::GeneratorMatrix;
use crate::{Error, Result};

/// Default cap on visited enumeration nodes per call.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;

static NODE_BUDGET: AtomicU64 = AtomicU64::new(DEFAULT_NODE_BUDGET);

/// Override the per-call node budget for the whole process.
pub fn set_node_budget(budget: u64) {
    NODE_BUDGET.store(budget.max(1), Ordering::Relaxed);
}

pub fn node_budget() -> u64 {
    NODE_BUDGET.load(Ordering::Relaxed)
}

/// Receives every leaf inside the current radius and returns the new squared radius.
pub(crate) trait Visitor {
    fn leaf(&mut self, z: &[i64], d2: f64) -> f64;
}

/// Cholesky data of a basis: `‖z·G − y‖² = ‖z·L − ŷ‖²` with `L` lower triangular.
#[derive(Clone, Debug)]
pub(crate) struct Enumerator {
    n: usize,
    /// Row-major lower-triangular factor of the Gram matrix.
    l: Vec<f64>,
    rows: Vec<f64>,
    budget: u64,
}

impl Enumerator {
    pub(crate) fn new(g: &GeneratorMatrix) -> Result<Self> {
        let n = g.n();
        let chol = g.gram().clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
        let lm = chol.l();
        let l = (0..n * n).map(|k| lm[(k / n, k % n)]).collect();
        let rows = (0..n).flat_map(|i| g.row(i).to_vec()).collect();
        Ok(Self { n, l, rows, budget: node_budget() })
    }

    #[cfg(test)]
    pub(crate) fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    #[inline]
    fn lij(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    /// Target in the triangular frame.
    pub(crate) fn project(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let w: Vec<f64> =
            (0..n).map(|i| self.rows[i * n..(i + 1) * n].iter().zip(y).map(|(a, b)| a * b).sum()).collect();
        let mut yh = vec![0.0; n];
        for j in 0..n {
            let s: f64 = (0..j).map(|k| self.lij(j, k) * yh[k]).sum();
            yh[j] = (w[j] - s) / self.lij(j, j);
        }
        yh
    }

    /// Depth-first enumeration in order of increasing partial distance at every level.
    /// Returns the number of visited nodes.
    pub(crate) fn run<V: Visitor>(
        &self,
        yh: &[f64],
        mut r2: f64,
        bounds: Option<&[(i64, i64)]>,
        visitor: &mut V,
    ) -> Result<u64> {
        let n = self.n;
        let budget = self.budget;
        let mut z = vec![0i64; n];
        let mut center = vec![0.0; n];
        let mut partial = vec![0.0; n + 1];
        let mut up = vec![0i64; n];
        let mut down = vec![0i64; n];
        let (lo, hi): (Vec<i64>, Vec<i64>) = match bounds {
            Some(b) => b.iter().copied().unzip(),
            None => (vec![i64::MIN / 4; n], vec![i64::MAX / 4; n]),
        };
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Ok(0);
        }
        let mut visited = 0u64;

        let init = |j: usize, z: &[i64], center: &mut [f64], up: &mut [i64], down: &mut [i64]| {
            let mut s = yh[j];
            for (i, &zi) in z.iter().enumerate().skip(j + 1) {
                s -= zi as f64 * self.lij(i, j);
            }
            let c = s / self.lij(j, j);
            center[j] = c;
            let r = (c.round() as i64).clamp(lo[j], hi[j]);
            up[j] = r;
            down[j] = r - 1;
        };

        let mut level = n - 1;
        init(level, &z, &mut center, &mut up, &mut down);
        loop {
            // Next candidate at this level: whichever frontier is nearer to the center.
            let c = center[level];
            let cand = match (up[level] <= hi[level], down[level] >= lo[level]) {
                (true, true) => {
                    if (up[level] as f64 - c).abs() < (c - down[level] as f64).abs() {
                        up[level] += 1;
                        Some(up[level] - 1)
                    } else {
                        down[level] -= 1;
                        Some(down[level] + 1)
                    }
                }
                (true, false) => {
                    up[level] += 1;
                    Some(up[level] - 1)
                }
                (false, true) => {
                    down[level] -= 1;
                    Some(down[level] + 1)
                }
                (false, false) => None,
            };
            let accepted = cand.and_then(|zj| {
                let diff = zj as f64 - c;
                let ljj = self.lij(level, level);
                let d = partial[level + 1] + ljj * ljj * diff * diff;
                (d <= r2).then_some((zj, d))
            });
            match accepted {
                Some((zj, d)) => {
                    visited += 1;
                    if visited > budget {
                        return Err(Error::BudgetExceeded { budget });
                    }
                    z[level] = zj;
                    if level == 0 {
                        r2 = visitor.leaf(&z, d);
                    } else {
                        partial[level] = d;
                        level -= 1;
                        init(level, &z, &mut center, &mut up, &mut down);
                    }
                }
                None => {
                    level += 1;
                    if level == n {
                        break;
                    }
                }
            }
        }
        Ok(visited)
    }
}

/// Keeps every leaf within `tol` of the best distance seen so far.
pub(crate) struct Closest {
    pub best: f64,
    ties: Vec<(Vec<i64>, f64)>,
    pub exclude_zero: bool,
}

impl Closest {
    pub(crate) fn new(exclude_zero: bool) -> Self {
        Self { best: f64::INFINITY, ties: Vec::new(), exclude_zero }
    }

    pub(crate) fn tol(best: f64) -> f64 {
        crate::EPS * best.max(1.0)
    }

    /// Ties that survived to the end.
    pub(crate) fn finish(self) -> (f64, Vec<Vec<i64>>) {
        let cut = self.best + Self::tol(self.best);
        let ties = self.ties.into_iter().filter(|(_, d)| *d <= cut).map(|(z, _)| z).collect();
        (self.best, ties)
    }
}

impl Visitor for Closest {
    fn leaf(&mut self, z: &[i64], d2: f64) -> f64 {
        if self.exclude_zero && z.iter().all(|&v| v == 0) {
            return self.best + Self::tol(self.best);
        }
        let tol = Self::tol(self.best);
        if d2 < self.best - tol {
            self.best = d2;
            self.ties.clear();
            self.ties.push((z.to_vec(), d2));
        } else if d2 <= self.best + tol {
            self.best = self.best.min(d2);
            self.ties.push((z.to_vec(), d2));
        }
        self.best + Self::tol(self.best)
    }
}

/// Collects every leaf inside a fixed radius.
pub(crate) struct Collect {
    pub r2: f64,
    pub points: Vec<(Vec<i64>, f64)>,
}

impl Visitor for Collect {
    fn leaf(&mut self, z: &[i64], d2: f64) -> f64 {
        self.points.push((z.to_vec(), d2));
        self.r2
    }
}

/// Folds a function of the squared distance over every leaf inside a fixed radius.
pub(crate) struct Accumulate<F: FnMut(&[i64], f64)> {
    pub r2: f64,
    pub f: F,
}

impl<F: FnMut(&[i64], f64)> Visitor for Accumulate<F> {
    fn leaf(&mut self, z: &[i64], d2: f64) -> f64 {
        (self.f)(z, d2);
        self.r2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn brute_force_agreement_2d() {
        let g = GeneratorMatrix::from_rows(&[vec![1.3, 0.2], vec![0.4, 0.9]]).unwrap();
        let e = Enumerator::new(&g).unwrap();
        let y = [0.77, -1.31];
        let mut all = Collect { r2: 4.0, points: vec![] };
        e.run(&e.project(&y), 4.0, None, &mut all).unwrap();
        let mut brute = 0;
        for a in -10i64..=10 {
            for b in -10i64..=10 {
                let x = g.point(&[a, b]);
                if crate::linalg::dist2(&x, &y) <= 4.0 {
                    brute += 1;
                }
            }
        }
        assert_eq!(all.points.len(), brute);
        for (z, d) in &all.points {
            assert!((crate::linalg::dist2(&g.point(z), &y) - d).abs() < 1e-9);
        }
    }

    #[test]
    fn box_bounds_are_respected() {
        let g = GeneratorMatrix::new(DMatrix::identity(3, 3)).unwrap();
        let e = Enumerator::new(&g).unwrap();
        let bounds = [(0, 1), (0, 1), (0, 1)];
        let mut all = Collect { r2: f64::INFINITY, points: vec![] };
        e.run(&e.project(&[5.0, -3.0, 0.5]), f64::INFINITY, Some(&bounds), &mut all).unwrap();
        assert_eq!(all.points.len(), 8);
    }

    #[test]
    fn budget_is_enforced() {
        let g = GeneratorMatrix::new(DMatrix::identity(4, 4)).unwrap();
        let e = Enumerator::new(&g).unwrap().with_budget(10);
        let mut all = Collect { r2: 9.0, points: vec![] };
        let r = e.run(&e.project(&[0.0; 4]), 9.0, None, &mut all);
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
    }
}
