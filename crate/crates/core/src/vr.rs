//! Voronoi-reducedness of a basis and the error bounds built on it.

use std::f64::consts::{E, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cvp::BoxDecoder;
use crate::lattice::{
    coding_gain, count_points_in_sphere, minimum_distance, sigma_from_vnr, theta_sum, CvpSolver, GeneratorMatrix,
};
use crate::sim::stats::{run_sharded, wilson_interval};
use crate::{Error, Result};

/// `vol(O)/vol(Λ)` below this is called quasi-VR.
pub const QUASI_VR_THRESHOLD: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VrReport {
    pub samples: u64,
    pub nonvr: u64,
    pub vol_ratio: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Smallest sampled distance² from a point of `O` to the nearest corner, over `ρ²`.
    /// An upper estimate of `d²_OC/ρ²`; `None` when no sample fell in `O`.
    pub d_oc_sq_over_rho_sq: Option<f64>,
    pub seed: u64,
}

impl VrReport {
    pub fn verdict(&self) -> &'static str {
        if self.nonvr == 0 {
            "VR-consistent"
        } else if self.vol_ratio < QUASI_VR_THRESHOLD {
            "quasi-VR"
        } else {
            "not quasi-VR"
        }
    }
}

fn uniform_point(g: &GeneratorMatrix, r: &mut impl Rng) -> Vec<f64> {
    let a: Vec<f64> = (0..g.n()).map(|_| r.random::<f64>()).collect();
    g.combine(&a)
}

fn is_corner(z: &[i64]) -> bool {
    z.iter().all(|&v| v == 0 || v == 1)
}

/// Monte-Carlo estimate of the non-VR region `O` of `P(B)`.
pub fn estimate_nonvr_volume(g: &GeneratorMatrix, samples: u64, seed: u64) -> Result<VrReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let solver = CvpSolver::new(g)?;
    let corners = BoxDecoder::corners(g)?;
    let shards = run_sharded(seed, samples, |_, r, count| -> Result<(u64, f64)> {
        let mut hits = 0;
        let mut best = f64::INFINITY;
        for _ in 0..count {
            let y = uniform_point(g, r);
            let z = solver.closest(&y)?;
            if !is_corner(&z) {
                hits += 1;
                best = best.min(corners.decode(&y)?.dist2);
            }
        }
        Ok((hits, best))
    });
    let mut nonvr = 0;
    let mut best = f64::INFINITY;
    for s in shards {
        let (h, b) = s?;
        nonvr += h;
        best = best.min(b);
    }
    let d = minimum_distance(g)?;
    let rho2 = d * d / 4.0;
    let (ci_lo, ci_hi) = wilson_interval(nonvr, samples);
    Ok(VrReport {
        samples,
        nonvr,
        vol_ratio: nonvr as f64 / samples as f64,
        ci_lo,
        ci_hi,
        d_oc_sq_over_rho_sq: (nonvr > 0).then_some(best / rho2),
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VrCheck {
    pub vr: bool,
    /// A sampled point of `P(B)` whose closest lattice point is not a corner.
    pub witness: Option<Vec<f64>>,
}

/// Samples the interior of `P(B)` and reports the first point (in shard order)
/// that decodes outside the corner set.
pub fn verify_vr_interior(g: &GeneratorMatrix, samples: u64, seed: u64) -> Result<VrCheck> {
    let solver = CvpSolver::new(g)?;
    let found = run_sharded(seed, samples, |_, r, count| -> Result<Option<Vec<f64>>> {
        for _ in 0..count {
            let y = uniform_point(g, r);
            if !is_corner(&solver.closest(&y)?) {
                return Ok(Some(y));
            }
        }
        Ok(None)
    });
    for f in found {
        if let Some(w) = f? {
            return Ok(VrCheck { vr: false, witness: Some(w) });
        }
    }
    Ok(VrCheck { vr: true, witness: None })
}

/// Truncated union bound `½ Σ_{0<‖x‖²≤cap} exp(−‖x‖²/(8σ²))`.
pub fn pe_union_bound(g: &GeneratorMatrix, delta: f64, radius2_cap: f64) -> Result<f64> {
    let s2 = sigma_from_vnr(g, delta)?;
    if radius2_cap <= 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * theta_sum(g, radius2_cap, |d| (-d / (8.0 * s2)).exp())?)
}

/// Leading term `(τ/2)·exp(−πeΔγ/4)` of the union bound.
pub fn union_bound_asymptote(g: &GeneratorMatrix, delta: f64) -> Result<f64> {
    let d = minimum_distance(g)?;
    let tau = count_points_in_sphere(g, d * d)? as f64;
    let gamma = coding_gain(g)?;
    Ok(0.5 * tau * (-PI * E * delta * gamma / 4.0).exp())
}

/// Error-probability bound for a quasi-VR basis decoded over the corners of `P(B)`.
pub fn lemma1_bound(pe_ub: f64, vol_ratio: f64, d_oc_sq_over_rho_sq: f64, gamma: f64, delta: f64, n: usize) -> f64 {
    pe_ub + lemma1_excess(vol_ratio, d_oc_sq_over_rho_sq, gamma, delta, n)
}

/// The second term of [`lemma1_bound`].
pub fn lemma1_excess(vol_ratio: f64, d_oc_sq_over_rho_sq: f64, gamma: f64, delta: f64, n: usize) -> f64 {
    vol_ratio * (E * delta).powf(n as f64 / 2.0) * (-PI * E * delta * gamma / 4.0 * d_oc_sq_over_rho_sq).exp()
}

/// Distance from the origin to the relevant facets of the dual-derived region:
/// `d / (√γ* · √γ)`.
pub fn facet_distance(d: f64, gamma: f64, gamma_dual: f64) -> f64 {
    d / (gamma_dual.sqrt() * gamma.sqrt())
}
