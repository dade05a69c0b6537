//! Gaussian-channel Monte-Carlo experiments.
//!
//! The all-zero point is transmitted; every trial draws a unit Gaussian vector
//! that is scaled by `σ` for each VNR, so all decoders and all grid points see
//! the same noise directions.

mod report;
pub mod stats;

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{histogram, ExperimentReport, HistogramBin, Metadata, ReportRow};

use crate::cvp::{reduce_to_parallelotope, Inner, Pipeline, CORNER_MAX_N, EXTENDED_CORNER_MAX_N};
use crate::lattice::{
    count_points_in_sphere, derive_seed, family_generator, lll_reduce, minimum_distance, random_gaussian_generator,
    random_mimo_with_seed, sigma_from_vnr, CvpSolver, GeneratorMatrix, LatticeFamily, LatticeFile, LLL_DELTA,
};
use crate::{Error, Result};
use stats::{shard_rng, wilson_interval, SHARDS};

pub const DEFAULT_MAX_ERRORS: u64 = 200;
pub const DEFAULT_MAX_TRIALS: u64 = 1_000_000;
/// Trials per shard per round of the stop rule.
const CHUNK: u64 = 256;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(delta: f64) -> f64 {
    10.0 * delta.log10()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_errors: u64,
    pub max_trials: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { max_errors: DEFAULT_MAX_ERRORS, max_trials: DEFAULT_MAX_TRIALS }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// Real embedding of a square complex channel with `CN(0, 1)` entries.
    ComplexMimo,
    /// I.i.d. real `N(0, 1)` entries.
    RealGaussian,
}

impl Ensemble {
    /// Draws lattice `index` of the ensemble; returns the generator and the seed used.
    pub fn draw(self, n: usize, seed: u64, index: u64) -> Result<(GeneratorMatrix, u64)> {
        let s = derive_seed(seed, index);
        match self {
            Ensemble::ComplexMimo => {
                if !n.is_multiple_of(2) {
                    return Err(Error::InvalidParameter(format!("complex MIMO lattices have even n, got {n}")));
                }
                random_mimo_with_seed(n / 2, s)
            }
            Ensemble::RealGaussian => random_gaussian_generator(n, s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LatticeSource {
    File { path: PathBuf },
    Family { family: LatticeFamily, n: usize },
}

impl LatticeSource {
    pub fn load(&self) -> Result<(GeneratorMatrix, Option<LatticeFamily>, String)> {
        match self {
            LatticeSource::File { path } => {
                let f = LatticeFile::read(path)?;
                Ok((f.generator()?, f.provenance.family, f.name))
            }
            LatticeSource::Family { family, n } => {
                let name = if family.supports(*n) && matches!(family, LatticeFamily::E8Special | LatticeFamily::E6Quasi)
                {
                    family.to_string()
                } else {
                    format!("{family}{n}")
                };
                Ok((family_generator(*family, *n)?, Some(*family), name))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub source: LatticeSource,
    pub decoders: Vec<Inner>,
    /// VNR grid, linear scale.
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub stop: StopRule,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.decoders.is_empty() {
            return Err(Error::InvalidParameter("no decoders given".into()));
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| d.is_nan() || *d <= 0.0) {
            return Err(Error::InvalidParameter("VNR values must be positive".into()));
        }
        if self.stop.max_trials == 0 {
            return Err(Error::InvalidParameter("max_trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Classifies one received point (transmitted point is the origin).
enum Judge {
    Pipeline(Pipeline),
    /// Corner-set decoders judged through the optimal point: an error unless the
    /// closest point lies in the candidate set and equals the transmitted point
    /// (when it is in the set, the candidate decoder returns exactly it).
    Candidates {
        solver: CvpSolver,
        lo: i64,
        hi: i64,
    },
}

impl Judge {
    fn new(g: &GeneratorMatrix, decoder: Inner, family: Option<LatticeFamily>) -> Result<Self> {
        let n = g.n();
        Ok(match decoder {
            Inner::Corner | Inner::ExtendedCorner => {
                let (lo, hi, max) =
                    if decoder == Inner::Corner { (0, 1, CORNER_MAX_N) } else { (-1, 2, EXTENDED_CORNER_MAX_N) };
                if n > max {
                    return Err(Error::TooLarge { what: "candidate-set decoding", n, max });
                }
                Judge::Candidates { solver: CvpSolver::new(g)?, lo, hi }
            }
            _ => Judge::Pipeline(Pipeline::new(g, decoder, family)?),
        })
    }

    fn error(&self, g: &GeneratorMatrix, y0: &[f64]) -> Result<bool> {
        match self {
            Judge::Pipeline(p) => Ok(p.decode(y0)?.z.iter().any(|&v| v != 0)),
            Judge::Candidates { solver, lo, hi } => {
                let pc = reduce_to_parallelotope(g, y0)?;
                let z = solver.closest(&pc.y_reduced)?;
                let in_set = z.iter().all(|v| (*lo..=*hi).contains(v));
                let wrong = z.iter().zip(&pc.t).any(|(a, b)| a + b != 0);
                Ok(!in_set || wrong)
            }
        }
    }
}

fn unit_noise(r: &mut ChaCha12Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect()
}

/// Error rate of one decoder at one VNR, with the stop rule applied per round of
/// `SHARDS × CHUNK` trials.
pub fn simulate_error_rate(
    g: &GeneratorMatrix,
    family: Option<LatticeFamily>,
    decoder: Inner,
    delta: f64,
    stop: StopRule,
    seed: u64,
) -> Result<ReportRow> {
    let sigma = sigma_from_vnr(g, delta)?.sqrt();
    let judge = Judge::new(g, decoder, family)?;
    let n = g.n();
    let mut rngs: Vec<ChaCha12Rng> = (0..SHARDS).map(|s| shard_rng(seed, s)).collect();
    let (mut errors, mut trials) = (0u64, 0u64);
    while errors < stop.max_errors && trials < stop.max_trials {
        let round = (stop.max_trials - trials).min(SHARDS as u64 * CHUNK);
        let base = round / SHARDS as u64;
        let extra = round % SHARDS as u64;
        let counts: Vec<Result<u64>> = rngs
            .par_iter_mut()
            .enumerate()
            .map(|(s, r)| {
                let mut e = 0;
                for _ in 0..base + u64::from((s as u64) < extra) {
                    let y: Vec<f64> = unit_noise(r, n).iter().map(|w| sigma * w).collect();
                    e += u64::from(judge.error(g, &y)?);
                }
                Ok(e)
            })
            .collect();
        for c in counts {
            errors += c?;
        }
        trials += round;
    }
    Ok(ReportRow::new(decoder.to_string(), delta, errors, trials))
}

/// Runs every (VNR, decoder) pair of a configuration.
pub fn run_simulation(config: &SimulationConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let (g, family, name) = config.source.load()?;
    let mut rows = Vec::new();
    for &delta in &config.deltas {
        for &dec in &config.decoders {
            rows.push(simulate_error_rate(&g, family, dec, delta, config.stop, config.seed)?);
        }
    }
    Ok(ExperimentReport {
        rows,
        metadata: Metadata { seed: config.seed, lattice: name, lattices: 1, ..Default::default() },
    })
}

/// MLD, CP and ExtCP error rates averaged over LLL-reduced random MIMO lattices.
/// Every lattice gets `trials` noise draws, reused across the VNR grid.
pub fn mimo_vr_experiment(
    half_n: usize,
    num_lattices: usize,
    deltas: &[f64],
    trials: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    let n = 2 * half_n;
    if n > CORNER_MAX_N {
        return Err(Error::TooLarge { what: "mimo_vr_experiment", n, max: CORNER_MAX_N });
    }
    if deltas.is_empty() || deltas.iter().any(|d| d.is_nan() || *d <= 0.0) {
        return Err(Error::InvalidParameter("VNR values must be positive".into()));
    }
    let with_ext = n <= EXTENDED_CORNER_MAX_N;
    type Counts = (Vec<[u64; 3]>, u64);
    let per_lattice: Vec<Result<Counts>> = (0..num_lattices)
        .into_par_iter()
        .map(|k| {
            let (g, used) = Ensemble::ComplexMimo.draw(n, seed, k as u64)?;
            let g = lll_reduce(&g, LLL_DELTA)?;
            let solver = CvpSolver::new(&g)?;
            let sigmas: Vec<f64> =
                deltas.iter().map(|&d| sigma_from_vnr(&g, d).map(f64::sqrt)).collect::<Result<_>>()?;
            let mut r = crate::lattice::rng(derive_seed(used, u64::MAX));
            let mut errs = vec![[0u64; 3]; deltas.len()];
            for _ in 0..trials {
                let w = unit_noise(&mut r, n);
                for (e, &s) in errs.iter_mut().zip(&sigmas) {
                    let y: Vec<f64> = w.iter().map(|v| s * v).collect();
                    let pc = reduce_to_parallelotope(&g, &y)?;
                    let z = solver.closest(&pc.y_reduced)?;
                    let wrong = z.iter().zip(&pc.t).any(|(a, b)| a + b != 0);
                    let corner = z.iter().all(|v| (0..=1).contains(v));
                    let ext = z.iter().all(|v| (-1..=2).contains(v));
                    e[0] += u64::from(wrong);
                    e[1] += u64::from(wrong || !corner);
                    e[2] += u64::from(wrong || !ext);
                }
            }
            Ok((errs, used))
        })
        .collect();
    let mut totals = vec![[0u64; 3]; deltas.len()];
    let mut resampled = Vec::new();
    for (k, res) in per_lattice.into_iter().enumerate() {
        let (errs, used) = res?;
        if used != derive_seed(seed, k as u64) {
            resampled.push(used);
        }
        for (t, e) in totals.iter_mut().zip(errs) {
            for i in 0..3 {
                t[i] += e[i];
            }
        }
    }
    let total_trials = trials * num_lattices as u64;
    let names = ["sphere", "corner", "extended-corner"];
    let mut rows = Vec::new();
    for (&delta, t) in deltas.iter().zip(&totals) {
        for (i, name) in names.iter().enumerate() {
            if i == 2 && !with_ext {
                continue;
            }
            rows.push(ReportRow::new((*name).to_string(), delta, t[i], total_trials));
        }
    }
    Ok(ExperimentReport {
        rows,
        metadata: Metadata {
            seed,
            lattice: format!("mimo n={n}"),
            lattices: num_lattices,
            resampled_seeds: resampled,
            ..Default::default()
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointsInSphereReport {
    pub n: usize,
    pub ensemble: Ensemble,
    /// Nonzero lattice points with `‖x‖² ≤ 2d²`, one entry per lattice.
    pub counts: Vec<u64>,
    /// Mean of `counts`.
    pub mean: f64,
    /// Ensemble seeds whose enumeration exceeded the node budget.
    pub skipped: Vec<u64>,
    pub seed: u64,
}

impl PointsInSphereReport {
    /// Mean number of lattice points in the ball, origin included.
    pub fn mean_with_origin(&self) -> f64 {
        self.mean + 1.0
    }
}

/// Statistics of the number of points inside the ball of squared radius `2d²`.
pub fn points_in_sphere_experiment(
    n: usize,
    num_lattices: usize,
    seed: u64,
    ensemble: Ensemble,
) -> Result<PointsInSphereReport> {
    if num_lattices == 0 {
        return Err(Error::InvalidParameter("need at least one lattice".into()));
    }
    let results: Vec<Result<std::result::Result<u64, u64>>> = (0..num_lattices)
        .into_par_iter()
        .map(|k| {
            let (g, used) = ensemble.draw(n, seed, k as u64)?;
            let g = lll_reduce(&g, LLL_DELTA)?;
            let count = minimum_distance(&g).and_then(|d| count_points_in_sphere(&g, 2.0 * d * d));
            match count {
                Ok(c) => Ok(Ok(c)),
                Err(Error::BudgetExceeded { .. }) => Ok(Err(used)),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut counts = Vec::new();
    let mut skipped = Vec::new();
    for r in results {
        match r? {
            Ok(c) => counts.push(c),
            Err(s) => skipped.push(s),
        }
    }
    let mean = counts.iter().sum::<u64>() as f64 / counts.len().max(1) as f64;
    Ok(PointsInSphereReport { n, ensemble, counts, mean, skipped, seed })
}

impl ReportRow {
    pub fn new(decoder: String, delta: f64, errors: u64, trials: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(errors, trials);
        Self {
            decoder,
            delta,
            delta_db: linear_to_db(delta),
            errors,
            trials,
            rate: if trials == 0 { 0.0 } else { errors as f64 / trials as f64 },
            ci_lo,
            ci_hi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_conversion() {
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((linear_to_db(db_to_linear(3.7)) - 3.7).abs() < 1e-12);
    }

    #[test]
    fn z4_vanishing_noise() {
        let g = family_generator(LatticeFamily::Z, 4).unwrap();
        for dec in [Inner::Sphere, Inner::Zf, Inner::Hld] {
            let row =
                simulate_error_rate(&g, None, dec, 100.0, StopRule { max_errors: 200, max_trials: 20_000 }, 1).unwrap();
            assert!(row.rate < 1e-3, "{dec}: {}", row.rate);
        }
    }

    #[test]
    fn corner_dominates_mld_on_one_lattice() {
        let g = lll_reduce(&crate::lattice::random_mimo_generator(5, 3).unwrap(), LLL_DELTA).unwrap();
        let stop = StopRule { max_errors: u64::MAX, max_trials: 30_000 };
        let delta = db_to_linear(6.0);
        let mld = simulate_error_rate(&g, None, Inner::Sphere, delta, stop, 5).unwrap();
        let cp = simulate_error_rate(&g, None, Inner::Corner, delta, stop, 5).unwrap();
        let ext = simulate_error_rate(&g, None, Inner::ExtendedCorner, delta, stop, 5).unwrap();
        assert!(cp.errors >= mld.errors);
        assert!(ext.errors <= cp.errors && ext.errors >= mld.errors);
    }

    #[test]
    fn reproducible_bytes() {
        let cfg = SimulationConfig {
            source: LatticeSource::Family { family: LatticeFamily::A, n: 3 },
            decoders: vec![Inner::Sphere, Inner::Hld],
            deltas: vec![1.5, 3.0],
            stop: StopRule { max_errors: 50, max_trials: 5_000 },
            seed: 77,
        };
        let a = serde_json::to_string(&run_simulation(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run_simulation(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stop_rule_respected() {
        let g = family_generator(LatticeFamily::A, 2).unwrap();
        let row =
            simulate_error_rate(&g, None, Inner::Sphere, 0.5, StopRule { max_errors: 100, max_trials: 1_000_000 }, 2)
                .unwrap();
        assert!(row.errors >= 100);
        assert!(row.trials <= (SHARDS as u64) * CHUNK);
        let row = simulate_error_rate(&g, None, Inner::Sphere, 50.0, StopRule { max_errors: 100, max_trials: 1000 }, 2)
            .unwrap();
        assert_eq!(row.trials, 1000);
    }

    #[test]
    fn mimo_experiment_ordering() {
        let rep = mimo_vr_experiment(3, 4, &[2.0, 4.0], 500, 9).unwrap();
        for chunk in rep.rows.chunks(3) {
            assert!(chunk[0].errors <= chunk[2].errors && chunk[2].errors <= chunk[1].errors);
        }
    }

    #[test]
    fn points_counts_are_even() {
        let rep = points_in_sphere_experiment(6, 10, 4, Ensemble::ComplexMimo).unwrap();
        assert!(rep.counts.iter().all(|c| c % 2 == 0));
        assert_eq!(rep.counts.len() + rep.skipped.len(), 10);
    }
}
