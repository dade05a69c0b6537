//! Lattice construction, reduction and interrogation.

mod enumerate;
mod family;
mod file;
mod generator;
mod lll;
mod random;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use enumerate::{node_budget, set_node_budget, DEFAULT_NODE_BUDGET};
pub(crate) use enumerate::{Accumulate, Closest, Collect, Enumerator};
pub use family::{gram_for_family, HalfIntegerMatrix, LatticeFamily};
pub use file::{LatticeFile, Provenance};
pub use generator::{dual_generator, generator_from_gram, GeneratorMatrix};
pub use lll::{lll_reduce, lll_with_transform, LllOutput};
pub(crate) use random::rng;
pub use random::{derive_seed, random_gaussian_generator, random_mimo_generator, random_mimo_with_seed};

use crate::{Error, Result};

/// LLL parameter used before every enumeration.
pub const LLL_DELTA: f64 = 0.99;

/// Generator of a structured family via Cholesky of its Gram matrix.
pub fn family_generator(family: LatticeFamily, n: usize) -> Result<GeneratorMatrix> {
    generator_from_gram(&gram_for_family(family, n)?.to_matrix())
}

/// A lattice vector with its coordinates in the basis it was requested for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeVector {
    pub z: Vec<i64>,
    pub x: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellCount {
    pub radius2: f64,
    pub count: u64,
}

/// Closest-point search on an LLL-reduced copy of a basis, reporting
/// coordinates in the original basis.
#[derive(Clone, Debug)]
pub struct CvpSolver {
    original: GeneratorMatrix,
    reduced: GeneratorMatrix,
    transform: Vec<Vec<i64>>,
    enumerator: Enumerator,
}

impl CvpSolver {
    pub fn new(g: &GeneratorMatrix) -> Result<Self> {
        let out = lll_with_transform(g, LLL_DELTA)?;
        let enumerator = Enumerator::new(&out.basis)?;
        Ok(Self { original: g.clone(), reduced: out.basis, transform: out.transform, enumerator })
    }

    pub fn basis(&self) -> &GeneratorMatrix {
        &self.original
    }

    pub fn reduced(&self) -> &GeneratorMatrix {
        &self.reduced
    }

    fn to_original(&self, w: &[i64]) -> Vec<i64> {
        let n = w.len();
        (0..n).map(|j| (0..n).map(|i| w[i] * self.transform[i][j]).sum()).collect()
    }

    fn closest_reduced(&self, y: &[f64]) -> Result<(f64, Vec<Vec<i64>>)> {
        self.original.check_dim(y)?;
        let mut v = Closest::new(false);
        self.enumerator.run(&self.enumerator.project(y), f64::INFINITY, None, &mut v)?;
        Ok(v.finish())
    }

    /// All closest lattice points (ties within tolerance), lexicographically sorted.
    pub fn closest_all(&self, y: &[f64]) -> Result<(f64, Vec<Vec<i64>>)> {
        let (d, ties) = self.closest_reduced(y)?;
        let mut zs: Vec<Vec<i64>> = ties.iter().map(|w| self.to_original(w)).collect();
        zs.sort();
        Ok((d, zs))
    }

    /// Closest lattice point; the lexicographically smallest `z` wins ties.
    pub fn closest(&self, y: &[f64]) -> Result<Vec<i64>> {
        let (_, ties) = self.closest_reduced(y)?;
        let z = ties
            .iter()
            .map(|w| self.to_original(w))
            .min()
            .expect("enumeration with infinite radius always finds a point");
        Ok(z)
    }

    /// Every nonzero lattice vector with `‖x‖² ≤ r2` (inclusive within tolerance).
    pub fn short_vectors(&self, r2: f64) -> Result<Vec<LatticeVector>> {
        let r2 = padded(r2);
        let mut c = Collect { r2, points: Vec::new() };
        let n = self.original.n();
        self.enumerator.run(&vec![0.0; n], r2, None, &mut c)?;
        let mut out: Vec<LatticeVector> = c
            .points
            .into_iter()
            .filter(|(w, _)| w.iter().any(|&v| v != 0))
            .map(|(w, _)| {
                let z = self.to_original(&w);
                let x = self.original.point(&z);
                LatticeVector { z, x }
            })
            .collect();
        out.sort_by(|a, b| a.z.cmp(&b.z));
        Ok(out)
    }

    /// Calls `f(‖x‖²)` for every nonzero lattice vector inside the radius.
    fn for_each_norm(&self, r2: f64, mut f: impl FnMut(f64)) -> Result<()> {
        let r2 = padded(r2);
        let n = self.original.n();
        let mut acc = Accumulate {
            r2,
            f: |w: &[i64], d: f64| {
                if w.iter().any(|&v| v != 0) {
                    f(d)
                }
            },
        };
        self.enumerator.run(&vec![0.0; n], r2, None, &mut acc)?;
        Ok(())
    }

    pub fn minimum_norm2(&self) -> Result<f64> {
        let n = self.original.n();
        let start = (0..n).map(|i| crate::linalg::norm2(self.reduced.row(i))).fold(f64::INFINITY, f64::min);
        let mut v = Closest::new(true);
        v.best = start;
        self.enumerator.run(&vec![0.0; n], padded(start), None, &mut v)?;
        Ok(v.best)
    }
}

fn padded(r2: f64) -> f64 {
    r2 + crate::EPS * r2.max(1.0)
}

/// `d(Λ)`, the length of a shortest nonzero vector.
pub fn minimum_distance(g: &GeneratorMatrix) -> Result<f64> {
    Ok(CvpSolver::new(g)?.minimum_norm2()?.sqrt())
}

/// Number of nonzero lattice points with `‖x‖² ≤ radius2`.
pub fn count_points_in_sphere(g: &GeneratorMatrix, radius2: f64) -> Result<u64> {
    if radius2 < 0.0 || radius2.is_nan() {
        return Err(Error::InvalidParameter(format!("radius² must be nonnegative, got {radius2}")));
    }
    let solver = CvpSolver::new(g)?;
    let mut count = 0u64;
    solver.for_each_norm(radius2, |_| count += 1)?;
    Ok(count)
}

/// Theta-series coefficients `τ_ℓ` for all shells with `0 < ℓ ≤ radius2`.
pub fn shell_counts(g: &GeneratorMatrix, radius2: f64) -> Result<Vec<ShellCount>> {
    let solver = CvpSolver::new(g)?;
    let mut norms = Vec::new();
    solver.for_each_norm(radius2, |d| norms.push(d))?;
    norms.sort_by(f64::total_cmp);
    let mut shells: Vec<ShellCount> = Vec::new();
    for d in norms {
        match shells.last_mut() {
            Some(s) if d - s.radius2 <= 1e-7 * s.radius2.max(1.0) => s.count += 1,
            _ => shells.push(ShellCount { radius2: d, count: 1 }),
        }
    }
    Ok(shells)
}

/// `Σ f(‖x‖²)` over the nonzero lattice vectors inside the radius.
pub(crate) fn theta_sum(g: &GeneratorMatrix, radius2: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let solver = CvpSolver::new(g)?;
    let mut s = 0.0;
    solver.for_each_norm(radius2, |d| s += f(d))?;
    Ok(s)
}

/// Voronoi-relevant vectors via the cosets of `Λ/2Λ`: a nonzero coset contributes
/// `±v` exactly when its shortest vectors are `±v` and nothing else.
pub fn relevant_vectors(g: &GeneratorMatrix) -> Result<Vec<LatticeVector>> {
    let n = g.n();
    if n > 16 {
        return Err(Error::TooLarge { what: "relevant_vectors", n, max: 16 });
    }
    let solver = CvpSolver::new(g)?;
    let r = solver.reduced();
    let found: Vec<Vec<Vec<i64>>> = (1u32..(1 << n))
        .into_par_iter()
        .map(|mask| {
            let c: Vec<i64> = (0..n).map(|i| i64::from(mask >> i & 1 == 1)).collect();
            let half: Vec<f64> = c.iter().map(|&v| -0.5 * v as f64).collect();
            let target = r.combine(&half);
            let (_, ties) = solver.closest_reduced(&target)?;
            Ok(if ties.len() == 2 {
                ties.iter().map(|w| w.iter().zip(&c).map(|(a, b)| 2 * a + b).collect()).collect()
            } else {
                Vec::new()
            })
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<LatticeVector> = found
        .into_iter()
        .flatten()
        .map(|w| {
            let z = solver.to_original(&w);
            let x = g.point(&z);
            LatticeVector { z, x }
        })
        .collect();
    out.sort_by(|a, b| a.z.cmp(&b.z));
    Ok(out)
}

/// Noise variance at volume-to-noise ratio `delta`: `σ² = vol^{2/n} / (2πe·Δ)`.
pub fn sigma_from_vnr(g: &GeneratorMatrix, delta: f64) -> Result<f64> {
    if delta <= 0.0 || delta.is_nan() {
        return Err(Error::InvalidParameter(format!("VNR must be positive, got {delta}")));
    }
    Ok(normalized_volume(g) / (2.0 * std::f64::consts::PI * std::f64::consts::E * delta))
}

/// `vol(Λ)^{2/n}`.
pub fn normalized_volume(g: &GeneratorMatrix) -> f64 {
    g.volume().powf(2.0 / g.n() as f64)
}

/// Nominal coding gain `γ = d² / vol^{2/n}`.
pub fn coding_gain(g: &GeneratorMatrix) -> Result<f64> {
    let d = minimum_distance(g)?;
    Ok(d * d / normalized_volume(g))
}
