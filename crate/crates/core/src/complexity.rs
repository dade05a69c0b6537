//! Piece counts of the `z_1` decision boundary.

use serde::{Deserialize, Serialize};

use crate::hld::{orient_basis, HldSynthesizer};
use crate::lattice::{GeneratorMatrix, LatticeFamily};
use crate::linalg::binom;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceCount {
    pub family: LatticeFamily,
    pub n: usize,
    pub formula: u64,
    pub enumerated: Option<u64>,
    pub folded: u64,
}

fn root_only(family: LatticeFamily, n: usize) -> Result<()> {
    family.check(n)?;
    if family.is_root() {
        Ok(())
    } else {
        Err(Error::Unsupported { family: family.to_string(), n })
    }
}

/// Closed-form piece count of the unfolded boundary.
pub fn count_pieces_formula(family: LatticeFamily, n: usize) -> Result<u64> {
    root_only(family, n)?;
    let n = n as u64;
    Ok(match family {
        LatticeFamily::A => (1..=n).map(|i| i * binom(n - 1, n - i)).sum(),
        LatticeFamily::D => {
            let s: u64 = (0..=n - 2)
                .map(|i| {
                    let m = n - 2 - i;
                    ((1 + m) + (1 + 2 * m + binom(m, 2))) * binom(n - 2, i)
                })
                .sum();
            s - 1
        }
        LatticeFamily::E => {
            let s: u64 = (0..=n - 3)
                .map(|i| {
                    let m = n - 3 - i;
                    let one = 1 + m;
                    let two = 1 + 2 * m + binom(m, 2);
                    let three = 1 + 3 * m + 3 * binom(m, 2) + binom(m, 3);
                    (one + 2 * two + three) * binom(n - 3, i)
                })
                .sum();
            s - 3
        }
        _ => unreachable!(),
    })
}

/// Piece count left after folding.
pub fn count_pieces_folded(family: LatticeFamily, n: usize) -> Result<u64> {
    root_only(family, n)?;
    let n = n as u64;
    Ok(match family {
        LatticeFamily::A => 2 * n - 1,
        LatticeFamily::D => 6 * n - 12,
        LatticeFamily::E => 12 * n - 40,
        _ => unreachable!(),
    })
}

/// Pieces of a synthesized `z_1` boundary and the histogram of term sizes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceEnumeration {
    pub pieces: u64,
    pub hyperplanes: usize,
    pub terms: usize,
    /// `histogram[k]` = number of distinct convex terms with `k` pieces.
    pub histogram: Vec<u64>,
}

pub const ENUMERATE_MAX_N: usize = 8;

/// Counts the boundary pieces of `z_1` by synthesis in the oriented frame.
///
/// A piece is a (hyperplane, convex term) incidence. Coincident bisectors are
/// merged first, and terms whose literal sets coincide after merging are the
/// same convex part, so they are counted once.
pub fn count_pieces_enumerate(g: &GeneratorMatrix) -> Result<PieceEnumeration> {
    let n = g.n();
    if n > ENUMERATE_MAX_N {
        return Err(Error::TooLarge { what: "count_pieces_enumerate", n, max: ENUMERATE_MAX_N });
    }
    let (go, _) = orient_basis(g)?;
    let dnf = HldSynthesizer::new(&go, None)?.synthesize(0)?;
    Ok(PieceEnumeration {
        pieces: dnf.piece_count(),
        hyperplanes: dnf.hyperplanes.len(),
        terms: dnf.distinct_terms().len(),
        histogram: dnf.term_histogram(),
    })
}

/// Neurons needed by a shallow network: `Σ_{i=2}^{n} (i−1)·C(n−1, n−i)`.
pub fn shallow_lower_bound(n: usize) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let n = n as u64;
    Ok((2..=n).map(|i| (i - 1) * binom(n - 1, n - i)).sum())
}

pub fn piece_table(family: LatticeFamily, n: usize, g: Option<&GeneratorMatrix>) -> Result<PieceCount> {
    Ok(PieceCount {
        family,
        n,
        formula: count_pieces_formula(family, n)?,
        enumerated: g.map(count_pieces_enumerate).transpose()?.map(|e| e.pieces),
        folded: count_pieces_folded(family, n)?,
    })
}
