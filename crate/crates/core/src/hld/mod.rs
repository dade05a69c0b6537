//! Hyperplane logical decoder.
//!
//! For coordinate `i`, the decision `ẑ_i ∈ {0, 1}` inside `P(B)` is an OR over
//! the corners with `z_i = 1` of an AND over hyperplane tests
//! `Heav(y·v − p)`. In the oriented frame (all of `B \ {g1}` in `y1 = 0`) the
//! `z_1` decision is `y1 ≥ f(ỹ)` for a min-of-max CPWL function `f`.

pub(crate) mod network;
mod synth;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::lattice::GeneratorMatrix;
use crate::linalg::{dot, householder_to, norm2};
use crate::{Error, Result};

pub use network::{export_hld_network, network_forward, Act, Activation, Layer, PiecewiseNetwork};
pub use synth::{synthesize_all, synthesize_hld, HldSynthesizer, HLD_MAX_N};

/// Bisector hyperplane `{y : y·v = p}` with `‖v‖ = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    #[serde(rename = "v")]
    pub normal: Vec<f64>,
    #[serde(rename = "p")]
    pub offset: f64,
}

impl Hyperplane {
    /// Bisector of `x` and `x'`, oriented so that `x` lies on the positive side.
    pub fn bisector(x: &[f64], x_prime: &[f64]) -> Self {
        let v: Vec<f64> = x.iter().zip(x_prime).map(|(a, b)| a - b).collect();
        let p = 0.5 * (norm2(x) - norm2(x_prime));
        let s = norm2(&v).sqrt();
        Self { normal: v.iter().map(|c| c / s).collect(), offset: p / s }
    }

    #[inline]
    pub fn eval(&self, y: &[f64]) -> f64 {
        dot(&self.normal, y) - self.offset
    }

    /// `Heav(y·v − p)` with `Heav(0) = 1`.
    #[inline]
    pub fn literal(&self, y: &[f64]) -> bool {
        self.eval(y) >= 0.0
    }

    pub(crate) fn same_as(&self, other: &Hyperplane, tol: f64) -> bool {
        (self.offset - other.offset).abs() < tol
            && self.normal.iter().zip(&other.normal).all(|(a, b)| (a - b).abs() < tol)
    }

    /// Height of the hyperplane above `ỹ`: solves `y·v = p` for `y1`.
    pub fn height(&self, yt: &[f64]) -> f64 {
        let rest: f64 = self.normal[1..].iter().zip(yt).map(|(a, b)| a * b).sum();
        (self.offset - rest) / self.normal[0]
    }
}

/// AND-term owned by a corner `x ∈ C¹`; `neighbors[k]` is the `C⁰` corner paired
/// with literal `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub corner: Vec<i64>,
    pub literals: Vec<usize>,
    pub neighbors: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateDnf {
    pub coordinate: usize,
    pub n: usize,
    pub hyperplanes: Vec<Hyperplane>,
    pub terms: Vec<Term>,
}

impl CoordinateDnf {
    pub fn eval(&self, y: &[f64]) -> bool {
        self.terms.iter().any(|t| t.literals.iter().all(|&h| self.hyperplanes[h].literal(y)))
    }

    /// Distinct convex terms, each as a sorted literal set.
    pub fn distinct_terms(&self) -> BTreeSet<Vec<usize>> {
        self.terms
            .iter()
            .map(|t| {
                let mut l = t.literals.clone();
                l.sort_unstable();
                l.dedup();
                l
            })
            .collect()
    }

    /// Pieces of the boundary: distinct (hyperplane, convex term) incidences.
    pub fn piece_count(&self) -> u64 {
        self.distinct_terms().iter().map(|t| t.len() as u64).sum()
    }

    /// Number of distinct convex terms with `k` literals, indexed by `k`.
    pub fn term_histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.n + 1];
        for t in self.distinct_terms() {
            if t.len() >= h.len() {
                h.resize(t.len() + 1, 0);
            }
            h[t.len()] += 1;
        }
        h
    }

    pub fn check(&self) -> Result<()> {
        for t in &self.terms {
            if t.literals.len() != t.neighbors.len() {
                return Err(Error::InvalidParameter("term literal/neighbor count mismatch".into()));
            }
            if let Some(&bad) = t.literals.iter().find(|&&h| h >= self.hyperplanes.len()) {
                return Err(Error::InvalidParameter(format!("hyperplane index {bad} out of range")));
            }
        }
        if let Some(h) = self.hyperplanes.iter().find(|h| h.normal.len() != self.n) {
            return Err(Error::DimensionMismatch { expected: self.n, got: h.normal.len() });
        }
        Ok(())
    }
}

/// Rotates the basis so that `g2..gn` lie in `y1 = 0` and `g1` has positive first
/// coordinate. Returns `(G·Q, Q)`.
pub fn orient_basis(g: &GeneratorMatrix) -> Result<(GeneratorMatrix, DMatrix<f64>)> {
    let n = g.n();
    let u: Vec<f64> = (0..n).map(|k| g.inverse()[(k, 0)]).collect();
    let s = norm2(&u).sqrt();
    let q1: Vec<f64> = u.iter().map(|c| c / s).collect();
    let q = householder_to(&q1);
    Ok((g.rotated(&q)?, q))
}

/// `ẑ_i` for every coordinate.
pub fn hld_decode(dnfs: &[CoordinateDnf], y: &[f64]) -> Vec<i64> {
    dnfs.iter().map(|d| i64::from(d.eval(y))).collect()
}

/// `f(ỹ) = min_terms max_literals h(ỹ)` for a `z_1` DNF in the oriented frame.
pub fn boundary_eval(dnf: &CoordinateDnf, yt: &[f64]) -> Result<f64> {
    if yt.len() + 1 != dnf.n {
        return Err(Error::DimensionMismatch { expected: dnf.n - 1, got: yt.len() });
    }
    check_function_form(dnf)?;
    let mut f = f64::INFINITY;
    for t in &dnf.terms {
        let m = t.literals.iter().map(|&h| dnf.hyperplanes[h].height(yt)).fold(f64::NEG_INFINITY, f64::max);
        f = f.min(m);
    }
    Ok(f)
}

pub(crate) fn check_function_form(dnf: &CoordinateDnf) -> Result<()> {
    for t in &dnf.terms {
        for &h in &t.literals {
            let v1 = dnf.hyperplanes[h].normal[0];
            if v1 <= 1e-12 {
                return Err(Error::NotAFunction { index: h, value: v1 });
            }
        }
    }
    Ok(())
}

/// Per-coordinate HLD over a fixed basis.
#[derive(Clone, Debug)]
pub struct HldDecoder {
    dnfs: Vec<CoordinateDnf>,
}

impl HldDecoder {
    pub fn new(g: &GeneratorMatrix) -> Result<Self> {
        Ok(Self { dnfs: synthesize_all(g, None)? })
    }

    pub fn from_dnfs(dnfs: Vec<CoordinateDnf>) -> Self {
        Self { dnfs }
    }

    pub fn dnfs(&self) -> &[CoordinateDnf] {
        &self.dnfs
    }

    pub fn decode(&self, y: &[f64]) -> Vec<i64> {
        hld_decode(&self.dnfs, y)
    }
}
