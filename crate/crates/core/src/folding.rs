//! Folding of the `z_1` decision boundary for `A_n`, `D_n` and `E_n`.
//!
//! Each reflection across the bisector of `g_j` and `g_k` swaps those two basis
//! vectors and fixes the others, so the boundary function is invariant under
//! it. Folding maps `ỹ` into the chamber where `ỹ·(g_j − g_k) ≥ 0` for all pairs,
//! and only the boundary pieces seen from that chamber are kept.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::complexity::count_pieces_folded;
use crate::hld::{
    check_function_form, export_hld_network, network::dnf_layers, orient_basis, Act, Activation, CoordinateDnf,
    HldSynthesizer, Layer, PiecewiseNetwork, Term,
};
use crate::lattice::{gram_for_family, GeneratorMatrix, LatticeFamily};
use crate::linalg::{dot, householder_to, norm2, vec_mat};
use crate::{Error, Result};

/// Tolerance of the chamber postcondition.
pub const CHAMBER_TOL: f64 = 1e-9;

/// Basis index pairs `(j, k)`, zero-based, in application order.
pub fn reflection_pairs(family: LatticeFamily, n: usize) -> Result<Vec<(usize, usize)>> {
    family.check(n)?;
    let tail =
        |from: usize| -> Vec<(usize, usize)> { (from..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect() };
    Ok(match family {
        LatticeFamily::A => tail(1),
        LatticeFamily::D => tail(2),
        LatticeFamily::E => std::iter::once((1, 2)).chain(tail(3)).collect(),
        _ => return Err(Error::Unsupported { family: family.to_string(), n }),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSequence {
    pub family: LatticeFamily,
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
    /// Unit vectors along `g_j − g_k`.
    pub normals: Vec<Vec<f64>>,
}

impl ReflectionSequence {
    /// Sequence for an oriented basis of the family.
    pub fn new(family: LatticeFamily, g: &GeneratorMatrix) -> Result<Self> {
        let n = g.n();
        let pairs = reflection_pairs(family, n)?;
        let normals = pairs
            .iter()
            .map(|&(j, k)| {
                let v: Vec<f64> = g.row(j).iter().zip(g.row(k)).map(|(a, b)| a - b).collect();
                let s = norm2(&v).sqrt();
                v.iter().map(|c| c / s).collect()
            })
            .collect();
        Ok(Self { family, n, pairs, normals })
    }
}

pub fn reflect_if_negative(y: &[f64], normal: &[f64]) -> Vec<f64> {
    let a = dot(y, normal);
    if a >= 0.0 {
        y.to_vec()
    } else {
        y.iter().zip(normal).map(|(yi, ni)| yi - 2.0 * a * ni).collect()
    }
}

/// Folds and reports how many passes changed the point.
pub fn fold_with_passes(seq: &ReflectionSequence, y: &[f64]) -> Result<(Vec<f64>, usize)> {
    if y.len() != seq.n {
        return Err(Error::DimensionMismatch { expected: seq.n, got: y.len() });
    }
    let max_passes = seq.n * seq.n;
    let mut y = y.to_vec();
    for pass in 0..=max_passes {
        let mut changed = false;
        for u in &seq.normals {
            let a = dot(&y, u);
            if a < 0.0 {
                for (yi, ui) in y.iter_mut().zip(u) {
                    *yi -= 2.0 * a * ui;
                }
                changed = true;
            }
        }
        if !changed {
            return Ok((y, pass));
        }
    }
    if seq.normals.iter().all(|u| dot(&y, u) >= -CHAMBER_TOL) {
        return Ok((y, max_passes));
    }
    Err(Error::FoldDiverged { passes: max_passes })
}

pub fn fold(seq: &ReflectionSequence, y: &[f64]) -> Result<Vec<f64>> {
    Ok(fold_with_passes(seq, y)?.0)
}

/// Keeps the terms and literals visible from the fundamental chamber: the owning
/// corner, and for a literal also its paired `C⁰` corner, must satisfy
/// `x·(g_j − g_k) ≥ 0` for every reflection pair.
pub fn folded_piece_set(family: LatticeFamily, n: usize, dnf: &CoordinateDnf) -> Result<CoordinateDnf> {
    if dnf.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: dnf.n });
    }
    if dnf.coordinate != 0 {
        return Err(Error::InvalidParameter("folding applies to the z1 decision".into()));
    }
    let gram = gram_for_family(family, n)?;
    let pairs = reflection_pairs(family, n)?;
    let in_chamber = |z: &[i64]| {
        pairs.iter().all(|&(j, k)| {
            let s: i64 = z.iter().enumerate().map(|(m, &zm)| zm * (gram.twice(m, j) - gram.twice(m, k))).sum();
            s >= 0
        })
    };

    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut remap: Vec<Option<usize>> = vec![None; dnf.hyperplanes.len()];
    let mut hyperplanes = Vec::new();
    let mut terms = Vec::new();
    for t in dnf.terms.iter().filter(|t| in_chamber(&t.corner)) {
        let kept: Vec<(usize, &Vec<i64>)> =
            t.literals.iter().zip(&t.neighbors).filter(|(_, nb)| in_chamber(nb)).map(|(&h, nb)| (h, nb)).collect();
        let mut key: Vec<usize> = kept.iter().map(|(h, _)| *h).collect();
        key.sort_unstable();
        if key.is_empty() || seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let mut literals = Vec::new();
        let mut neighbors = Vec::new();
        for (h, nb) in kept {
            let idx = *remap[h].get_or_insert_with(|| {
                hyperplanes.push(dnf.hyperplanes[h].clone());
                hyperplanes.len() - 1
            });
            literals.push(idx);
            neighbors.push(nb.clone());
        }
        terms.push(Term { corner: t.corner.clone(), literals, neighbors });
    }
    let folded = CoordinateDnf { coordinate: 0, n, hyperplanes, terms };
    let expected = count_pieces_folded(family, n)?;
    let got = folded.piece_count();
    if got != expected {
        return Err(Error::CountMismatch { expected, got });
    }
    Ok(folded)
}

/// `z_1` bit of an oriented-frame point: fold, then evaluate the reduced DNF.
pub fn folded_decode(dnf_folded: &CoordinateDnf, seq: &ReflectionSequence, y: &[f64]) -> Result<bool> {
    Ok(dnf_folded.eval(&fold(seq, y)?))
}

/// Reduced boundary height at a folded point, for discrimination `y1 ≥ f(ỹ)`.
pub fn folded_boundary(dnf_folded: &CoordinateDnf, seq: &ReflectionSequence, yt: &[f64]) -> Result<f64> {
    check_function_form(dnf_folded)?;
    let mut y = Vec::with_capacity(yt.len() + 1);
    y.push(0.0);
    y.extend_from_slice(yt);
    let f = fold(seq, &y)?;
    crate::hld::boundary_eval(dnf_folded, &f[1..])
}

/// One block per reflection: rotate so the normal is the first axis, take the
/// absolute value of that coordinate with a ramp and a negated ramp, rotate back.
fn reflection_block(u: &[f64]) -> [Layer; 2] {
    let n = u.len();
    let h = householder_to(u);
    let hidden = Layer {
        w: (0..n)
            .map(|i| {
                let mut row = vec![u[i], u[i]];
                row.extend((1..n).map(|k| h[(i, k)]));
                row
            })
            .collect(),
        b: vec![0.0; n + 1],
        act: Activation::PerUnit(
            [Act::Ramp, Act::NegRamp].into_iter().chain(std::iter::repeat_n(Act::Identity, n - 1)).collect(),
        ),
        block: Some("reflection".into()),
    };
    let out = Layer {
        w: [u.to_vec(), u.to_vec()].into_iter().chain((1..n).map(|k| (0..n).map(|i| h[(i, k)]).collect())).collect(),
        b: vec![0.0; n],
        act: Activation::Uniform(Act::Identity),
        block: Some("reflection".into()),
    };
    [hidden, out]
}

/// Reflection blocks (one sorting pass) followed by the reduced HLD layers.
///
/// Every reflection transposes the basis coordinates `y·g_j` and `y·g_k` when
/// they are out of order, so a pass in lexicographic pair order is a selection
/// sort and already lands in the chamber.
pub fn export_folding_network(seq: &ReflectionSequence, dnf_folded: &CoordinateDnf) -> Result<PiecewiseNetwork> {
    if seq.normals.is_empty() {
        let mut net = export_hld_network(std::slice::from_ref(dnf_folded))?;
        net.reflections = Some(seq.clone());
        return Ok(net);
    }
    let mut layers: Vec<Layer> = seq.normals.iter().flat_map(|u| reflection_block(u)).collect();
    layers.extend(dnf_layers(std::slice::from_ref(dnf_folded))?);
    Ok(PiecewiseNetwork { input_dim: seq.n, layers, reflections: Some(seq.clone()) })
}

/// Folded `z_1` decision for one basis ordering.
#[derive(Clone, Debug)]
pub struct FoldedCoordinate {
    q: DMatrix<f64>,
    seq: ReflectionSequence,
    dnf: CoordinateDnf,
}

impl FoldedCoordinate {
    /// `g` must have the family's Gram matrix.
    pub fn new(family: LatticeFamily, g: &GeneratorMatrix) -> Result<Self> {
        let n = g.n();
        let want = gram_for_family(family, n)?.to_matrix();
        if (g.gram() - &want).amax() > 1e-7 {
            return Err(Error::InvalidParameter(format!(
                "basis does not have the {family}{n} Gram matrix required for folding"
            )));
        }
        let (go, q) = orient_basis(g)?;
        let seq = ReflectionSequence::new(family, &go)?;
        let dnf = HldSynthesizer::new(&go, None)?.synthesize(0)?;
        let dnf = folded_piece_set(family, n, &dnf)?;
        Ok(Self { q, seq, dnf })
    }

    pub fn sequence(&self) -> &ReflectionSequence {
        &self.seq
    }

    pub fn dnf(&self) -> &CoordinateDnf {
        &self.dnf
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Bit for a point given in the original (unrotated) frame.
    pub fn bit(&self, y: &[f64]) -> Result<bool> {
        folded_decode(&self.dnf, &self.seq, &vec_mat(y, &self.q))
    }
}

/// Full decoder: every `A_n` coordinate is folded after permuting it into first
/// position; for `D_n`/`E_n` only `z_1` is folded and the rest use the plain HLD.
#[derive(Clone, Debug)]
pub struct FoldingDecoder {
    folded: Vec<Option<FoldedCoordinate>>,
    plain: Vec<Option<CoordinateDnf>>,
}

impl FoldingDecoder {
    pub fn new(family: LatticeFamily, g: &GeneratorMatrix) -> Result<Self> {
        let n = g.n();
        if !family.is_root() {
            return Err(Error::Unsupported { family: family.to_string(), n });
        }
        let mut folded = Vec::with_capacity(n);
        let mut plain = vec![None; n];
        folded.push(Some(FoldedCoordinate::new(family, g)?));
        if family == LatticeFamily::A {
            for i in 1..n {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.swap(0, i);
                folded.push(Some(FoldedCoordinate::new(family, &g.permuted(&perm)?)?));
            }
        } else {
            let synth = HldSynthesizer::new(g, None)?;
            for (i, slot) in plain.iter_mut().enumerate().skip(1) {
                *slot = Some(synth.synthesize(i)?);
                folded.push(None);
            }
        }
        Ok(Self { folded, plain })
    }

    pub fn decode(&self, y: &[f64]) -> Result<Vec<i64>> {
        self.folded
            .iter()
            .zip(&self.plain)
            .map(|(f, p)| match (f, p) {
                (Some(f), _) => f.bit(y).map(i64::from),
                (None, Some(d)) => Ok(i64::from(d.eval(y))),
                (None, None) => unreachable!("every coordinate has a decoder"),
            })
            .collect()
    }
}
