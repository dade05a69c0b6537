use rayon::prelude::*;

use super::{CoordinateDnf, Hyperplane, Term};
use crate::lattice::{minimum_distance, relevant_vectors, CvpSolver, GeneratorMatrix, LatticeVector};
use crate::{Error, Result};

pub const HLD_MAX_N: usize = 10;
/// Probe offset past the bisector, relative to `d(Λ)`.
pub const EPSILON_FACTOR: f64 = 1e-4;
/// Probes with basis coordinates outside `[−tol, 1 + tol]` are outside `P(B)`.
const INSIDE_TOL: f64 = 1e-9;
/// Hyperplanes closer than this (unit normals, max-norm) are merged.
pub const DEDUP_TOL: f64 = 1e-7;

/// Shared state for synthesizing several coordinates of one basis.
pub struct HldSynthesizer {
    g: GeneratorMatrix,
    solver: CvpSolver,
    relevant: Vec<LatticeVector>,
    epsilon: f64,
}

impl HldSynthesizer {
    pub fn new(g: &GeneratorMatrix, epsilon: Option<f64>) -> Result<Self> {
        let n = g.n();
        if n > HLD_MAX_N {
            return Err(Error::TooLarge { what: "synthesize_hld", n, max: HLD_MAX_N });
        }
        let epsilon = match epsilon {
            Some(e) if e > 0.0 => e,
            Some(e) => return Err(Error::InvalidParameter(format!("epsilon must be positive, got {e}"))),
            None => EPSILON_FACTOR * minimum_distance(g)?,
        };
        Ok(Self { g: g.clone(), solver: CvpSolver::new(g)?, relevant: relevant_vectors(g)?, epsilon })
    }

    pub fn relevant(&self) -> &[LatticeVector] {
        &self.relevant
    }

    fn inside(&self, y: &[f64]) -> bool {
        self.g.coords(y).iter().all(|&a| (-INSIDE_TOL..=1.0 + INSIDE_TOL).contains(&a))
    }

    /// Recorded `(neighbor z, hyperplane)` pairs of one `C¹` corner.
    fn probe_corner(&self, corner: &[i64], i: usize) -> Result<Vec<(Vec<i64>, Hyperplane)>> {
        let x = self.g.point(corner);
        let mut out = Vec::new();
        for v in &self.relevant {
            let norm = crate::linalg::norm2(&v.x).sqrt();
            let s = 0.5 + self.epsilon / norm;
            let probe: Vec<f64> = x.iter().zip(&v.x).map(|(a, b)| a + s * b).collect();
            if !self.inside(&probe) {
                continue;
            }
            let z = self.solver.closest(&probe)?;
            if z[i] == 0 {
                let nb: Vec<i64> = corner.iter().zip(&v.z).map(|(a, b)| a + b).collect();
                let xp = self.g.point(&nb);
                out.push((nb, Hyperplane::bisector(&x, &xp)));
            }
        }
        Ok(out)
    }

    pub fn synthesize(&self, i: usize) -> Result<CoordinateDnf> {
        let n = self.g.n();
        if i >= n {
            return Err(Error::InvalidParameter(format!("coordinate {i} out of range for n = {n}")));
        }
        // C¹ corners in lexicographic order of z.
        let corners: Vec<Vec<i64>> = (0u32..1 << n)
            .map(|m| (0..n).map(|k| i64::from(m >> (n - 1 - k) & 1 == 1)).collect::<Vec<i64>>())
            .filter(|c| c[i] == 1)
            .collect();
        let probed: Vec<Vec<(Vec<i64>, Hyperplane)>> =
            corners.par_iter().map(|c| self.probe_corner(c, i)).collect::<Result<_>>()?;

        let mut pool: Vec<Hyperplane> = Vec::new();
        let mut terms = Vec::new();
        for (corner, found) in corners.into_iter().zip(probed) {
            let mut literals = Vec::new();
            let mut neighbors = Vec::new();
            for (nb, h) in found {
                let idx = match pool.iter().position(|q| q.same_as(&h, DEDUP_TOL)) {
                    Some(k) => k,
                    None => {
                        pool.push(h);
                        pool.len() - 1
                    }
                };
                if !literals.contains(&idx) {
                    literals.push(idx);
                    neighbors.push(nb);
                }
            }
            if !literals.is_empty() {
                terms.push(Term { corner, literals, neighbors });
            }
        }
        Ok(CoordinateDnf { coordinate: i, n, hyperplanes: pool, terms })
    }
}

/// Algorithm-1 style brute-force synthesis of the `ẑ_i` decision.
pub fn synthesize_hld(g: &GeneratorMatrix, coordinate: usize, epsilon: Option<f64>) -> Result<CoordinateDnf> {
    HldSynthesizer::new(g, epsilon)?.synthesize(coordinate)
}

pub fn synthesize_all(g: &GeneratorMatrix, epsilon: Option<f64>) -> Result<Vec<CoordinateDnf>> {
    let s = HldSynthesizer::new(g, epsilon)?;
    (0..g.n()).map(|i| s.synthesize(i)).collect()
}
