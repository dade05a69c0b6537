//! Closest-vector decoders and the parallelotope reduction pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::folding::FoldingDecoder;
use crate::hld::HldDecoder;
use crate::lattice::{Closest, CvpSolver, Enumerator, GeneratorMatrix, LatticeFamily};
use crate::linalg::dist2;
use crate::{Error, Result};

/// Largest dimension for exhaustive corner decoding.
pub const CORNER_MAX_N: usize = 20;
/// Largest dimension for extended-corner decoding.
pub const EXTENDED_CORNER_MAX_N: usize = 18;
/// Snap tolerance for parallelotope coordinates just below 1.
pub const ALPHA_SNAP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub z: Vec<i64>,
    pub x: Vec<f64>,
    pub dist2: f64,
}

impl DecodeResult {
    pub fn from_z(g: &GeneratorMatrix, z: Vec<i64>, y: &[f64]) -> Self {
        let x = g.point(&z);
        let dist2 = dist2(&x, y);
        Self { z, x, dist2 }
    }
}

/// `y0 = y_reduced + t·G` with `y_reduced = alpha·G ∈ P(B)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParallelotopeCoords {
    pub t: Vec<i64>,
    pub y_reduced: Vec<f64>,
    pub alpha: Vec<f64>,
}

pub fn reduce_to_parallelotope(g: &GeneratorMatrix, y0: &[f64]) -> Result<ParallelotopeCoords> {
    g.check_dim(y0)?;
    let a = g.coords(y0);
    let mut t = Vec::with_capacity(a.len());
    let mut alpha = Vec::with_capacity(a.len());
    for &ai in &a {
        let mut ti = ai.floor();
        let mut fi = ai - ti;
        if fi >= 1.0 - ALPHA_SNAP {
            ti += 1.0;
            fi = 0.0;
        }
        t.push(ti as i64);
        alpha.push(fi.max(0.0));
    }
    let shift = g.point(&t);
    let y_reduced = y0.iter().zip(&shift).map(|(a, b)| a - b).collect();
    Ok(ParallelotopeCoords { t, y_reduced, alpha })
}

pub fn sphere_decode(g: &GeneratorMatrix, y: &[f64]) -> Result<DecodeResult> {
    let solver = CvpSolver::new(g)?;
    let z = solver.closest(y)?;
    Ok(DecodeResult::from_z(g, z, y))
}

/// Componentwise rounding of `y·G⁻¹`, halves rounded toward `+∞`.
pub fn zf_decode(g: &GeneratorMatrix, y: &[f64]) -> Result<DecodeResult> {
    g.check_dim(y)?;
    let z = g.coords(y).iter().map(|a| (a + 0.5).floor() as i64).collect();
    Ok(DecodeResult::from_z(g, z, y))
}

/// Closest point among `z ∈ [lo, hi]^n` on the given basis (no reduction, so
/// the coordinates keep their meaning).
#[derive(Clone, Debug)]
pub struct BoxDecoder {
    g: GeneratorMatrix,
    enumerator: Enumerator,
    bounds: Vec<(i64, i64)>,
}

impl BoxDecoder {
    pub fn new(g: &GeneratorMatrix, lo: i64, hi: i64) -> Result<Self> {
        Ok(Self { g: g.clone(), enumerator: Enumerator::new(g)?, bounds: vec![(lo, hi); g.n()] })
    }

    pub fn corners(g: &GeneratorMatrix) -> Result<Self> {
        if g.n() > CORNER_MAX_N {
            return Err(Error::TooLarge { what: "corner_decode", n: g.n(), max: CORNER_MAX_N });
        }
        Self::new(g, 0, 1)
    }

    pub fn extended_corners(g: &GeneratorMatrix) -> Result<Self> {
        if g.n() > EXTENDED_CORNER_MAX_N {
            return Err(Error::TooLarge { what: "extended_corner_decode", n: g.n(), max: EXTENDED_CORNER_MAX_N });
        }
        Self::new(g, -1, 2)
    }

    pub fn decode(&self, y: &[f64]) -> Result<DecodeResult> {
        self.g.check_dim(y)?;
        let mut v = Closest::new(false);
        self.enumerator.run(&self.enumerator.project(y), f64::INFINITY, Some(&self.bounds), &mut v)?;
        let (_, ties) = v.finish();
        let z = ties.into_iter().min().expect("nonempty box");
        Ok(DecodeResult::from_z(&self.g, z, y))
    }
}

pub fn corner_decode(g: &GeneratorMatrix, y: &[f64]) -> Result<DecodeResult> {
    BoxDecoder::corners(g)?.decode(y)
}

pub fn extended_corner_decode(g: &GeneratorMatrix, y: &[f64]) -> Result<DecodeResult> {
    BoxDecoder::extended_corners(g)?.decode(y)
}

/// Decoder applied to the reduced point inside `P(B)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inner {
    Sphere,
    Zf,
    Corner,
    ExtendedCorner,
    Hld,
    Folding,
}

impl fmt::Display for Inner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inner::Sphere => "sphere",
            Inner::Zf => "zf",
            Inner::Corner => "corner",
            Inner::ExtendedCorner => "extended-corner",
            Inner::Hld => "hld",
            Inner::Folding => "folding",
        })
    }
}

impl FromStr for Inner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sphere" | "mld" => Inner::Sphere,
            "zf" => Inner::Zf,
            "corner" | "cp" => Inner::Corner,
            "extended-corner" | "extcp" => Inner::ExtendedCorner,
            "hld" => Inner::Hld,
            "folding" => Inner::Folding,
            other => return Err(Error::InvalidParameter(format!("unknown decoder `{other}`"))),
        })
    }
}

enum InnerDecoder {
    Sphere(Box<CvpSolver>),
    Zf,
    Box(BoxDecoder),
    Hld(HldDecoder),
    Folding(FoldingDecoder),
}

/// Steps 0–3: reduce `y0` into `P(B)`, decode there, translate back.
pub struct Pipeline {
    g: GeneratorMatrix,
    inner: InnerDecoder,
}

impl Pipeline {
    /// `family` is needed only for the folding decoder, whose basis must be the
    /// family's own Gram-derived basis up to rotation.
    pub fn new(g: &GeneratorMatrix, inner: Inner, family: Option<LatticeFamily>) -> Result<Self> {
        let dec = match inner {
            Inner::Sphere => InnerDecoder::Sphere(Box::new(CvpSolver::new(g)?)),
            Inner::Zf => InnerDecoder::Zf,
            Inner::Corner => InnerDecoder::Box(BoxDecoder::corners(g)?),
            Inner::ExtendedCorner => InnerDecoder::Box(BoxDecoder::extended_corners(g)?),
            Inner::Hld => InnerDecoder::Hld(HldDecoder::new(g)?),
            Inner::Folding => {
                let family = family
                    .ok_or_else(|| Error::InvalidParameter("the folding decoder needs a lattice family".into()))?;
                InnerDecoder::Folding(FoldingDecoder::new(family, g)?)
            }
        };
        Ok(Self { g: g.clone(), inner: dec })
    }

    pub fn decode(&self, y0: &[f64]) -> Result<DecodeResult> {
        let pc = reduce_to_parallelotope(&self.g, y0)?;
        let y = &pc.y_reduced;
        let inner_z = match &self.inner {
            InnerDecoder::Sphere(s) => s.closest(y)?,
            InnerDecoder::Zf => zf_decode(&self.g, y)?.z,
            InnerDecoder::Box(b) => b.decode(y)?.z,
            InnerDecoder::Hld(h) => h.decode(y),
            InnerDecoder::Folding(f) => f.decode(y)?,
        };
        let z = inner_z.iter().zip(&pc.t).map(|(a, b)| a + b).collect();
        Ok(DecodeResult::from_z(&self.g, z, y0))
    }
}

pub fn pipeline_decode(g: &GeneratorMatrix, y0: &[f64], inner: Inner) -> Result<DecodeResult> {
    Pipeline::new(g, inner, None)?.decode(y0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{family_generator, random_mimo_generator, rng};
    use nalgebra::DMatrix;
    use rand::Rng;

    fn uniform(r: &mut impl Rng, n: usize, span: f64) -> Vec<f64> {
        (0..n).map(|_| r.random_range(-span..span)).collect()
    }

    #[test]
    fn lattice_point_decodes_to_itself() {
        let g = random_mimo_generator(2, 3).unwrap();
        let z = vec![2, -1, 0, 3];
        let y = g.point(&z);
        let d = sphere_decode(&g, &y).unwrap();
        assert_eq!(d.z, z);
        assert!(d.dist2 < 1e-18);
        assert_eq!(zf_decode(&g, &y).unwrap().z, z);
    }

    #[test]
    fn z3_rounding_region() {
        let g = GeneratorMatrix::new(DMatrix::identity(3, 3)).unwrap();
        let d = sphere_decode(&g, &[0.4, -0.2, 0.49]).unwrap();
        assert_eq!(d.z, vec![0, 0, 0]);
        // Halves round up under ZF; sphere decoding breaks the tie lexicographically.
        assert_eq!(zf_decode(&g, &[0.5, -0.5, 0.0]).unwrap().z, vec![1, 0, 0]);
        assert_eq!(sphere_decode(&g, &[0.5, 0.0, 0.0]).unwrap().z, vec![0, 0, 0]);
    }

    #[test]
    fn sphere_matches_brute_force_n4() {
        let g = random_mimo_generator(2, 17).unwrap();
        let solver = CvpSolver::new(&g).unwrap();
        let mut r = rng(99);
        for _ in 0..1000 {
            let y = uniform(&mut r, 4, 2.0);
            let z = solver.closest(&y).unwrap();
            let d = dist2(&g.point(&z), &y);
            let mut best = f64::INFINITY;
            let mut c = [-6i64; 4];
            'outer: loop {
                best = best.min(dist2(&g.point(&c), &y));
                for ci in c.iter_mut() {
                    *ci += 1;
                    if *ci <= 6 {
                        continue 'outer;
                    }
                    *ci = -6;
                }
                break;
            }
            assert!((d - best).abs() < 1e-9);
        }
    }

    #[test]
    fn parallelotope_round_trip() {
        let g = random_mimo_generator(3, 2).unwrap();
        let mut r = rng(5);
        for _ in 0..200 {
            let y0 = uniform(&mut r, 6, 5.0);
            let pc = reduce_to_parallelotope(&g, &y0).unwrap();
            assert!(pc.alpha.iter().all(|a| (0.0..1.0).contains(a)));
            let back: Vec<f64> = g.point(&pc.t).iter().zip(&pc.y_reduced).map(|(a, b)| a + b).collect();
            assert!(dist2(&back, &y0) < 1e-18);
            let ya = g.combine(&pc.alpha);
            assert!(dist2(&ya, &pc.y_reduced) < 1e-16);
        }
        let z = vec![1, -2, 0, 4, 0, -1];
        let pc = reduce_to_parallelotope(&g, &g.point(&z)).unwrap();
        assert_eq!(pc.t, z);
        assert!(pc.alpha.iter().all(|&a| a.abs() < 1e-9));
    }

    #[test]
    fn corner_decoding_on_vr_a2() {
        let g = family_generator(LatticeFamily::A, 2).unwrap();
        let mut r = rng(1);
        for _ in 0..2000 {
            let a: Vec<f64> = (0..2).map(|_| r.random::<f64>()).collect();
            let y = g.combine(&a);
            let c = corner_decode(&g, &y).unwrap();
            let s = sphere_decode(&g, &y).unwrap();
            assert_eq!(c.z, s.z);
        }
    }

    #[test]
    fn zf_returns_a_corner_at_deep_hole() {
        let g = family_generator(LatticeFamily::A, 2).unwrap();
        // Deep hole of the triangle 0, g1, g2 (circumcenter).
        let hole = g.combine(&[1.0 / 3.0, 1.0 / 3.0]);
        let z = zf_decode(&g, &hole).unwrap().z;
        assert!(z.iter().all(|&v| v == 0 || v == 1));
    }

    #[test]
    fn non_vr_basis_corner_differs() {
        // Skewed basis: g2 − g1 is short and lies outside the corner set.
        let g = GeneratorMatrix::from_rows(&[vec![1.0, 0.0], vec![2.3, 0.4]]).unwrap();
        let y = g.combine(&[0.3, 0.5]);
        let s = sphere_decode(&g, &y).unwrap();
        let c = corner_decode(&g, &y).unwrap();
        assert!(c.dist2 > s.dist2 + 1e-9);
        assert!(s.z.iter().any(|&v| v != 0 && v != 1));
    }

    #[test]
    fn extended_dominates_corner() {
        let g = random_mimo_generator(3, 8).unwrap();
        let cp = BoxDecoder::corners(&g).unwrap();
        let ext = BoxDecoder::extended_corners(&g).unwrap();
        let mut r = rng(2);
        for _ in 0..500 {
            let a: Vec<f64> = (0..6).map(|_| r.random::<f64>()).collect();
            let y = g.combine(&a);
            let c = cp.decode(&y).unwrap();
            let e = ext.decode(&y).unwrap();
            assert!(e.dist2 <= c.dist2 + 1e-12);
            let s = sphere_decode(&g, &y).unwrap();
            assert!(s.dist2 <= e.dist2 + 1e-12);
            if c.dist2 <= s.dist2 + 1e-12 {
                assert_eq!(e.z, c.z);
            }
        }
    }

    #[test]
    fn pipeline_identities() {
        let g = random_mimo_generator(2, 44).unwrap();
        let sp = Pipeline::new(&g, Inner::Sphere, None).unwrap();
        let zf = Pipeline::new(&g, Inner::Zf, None).unwrap();
        let mut r = rng(7);
        for _ in 0..300 {
            let y0 = uniform(&mut r, 4, 4.0);
            assert_eq!(sp.decode(&y0).unwrap().z, sphere_decode(&g, &y0).unwrap().z);
            assert_eq!(zf.decode(&y0).unwrap().z, zf_decode(&g, &y0).unwrap().z);
        }
    }

    #[test]
    fn size_limits() {
        let g = GeneratorMatrix::new(DMatrix::identity(21, 21)).unwrap();
        assert!(matches!(BoxDecoder::corners(&g), Err(Error::TooLarge { .. })));
        let g = GeneratorMatrix::new(DMatrix::identity(19, 19)).unwrap();
        assert!(BoxDecoder::extended_corners(&g).is_err());
        assert!("nope".parse::<Inner>().is_err());
    }
}
