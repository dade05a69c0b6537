use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lattice families with a closed-form Gram matrix, plus the random MIMO ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeFamily {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "D")]
    D,
    /// `E_6`, `E_7`, `E_8` in the `J + I` style basis.
    #[serde(rename = "E")]
    E,
    /// The alternative `E_8` basis with all row norms 4.
    #[serde(rename = "E8")]
    E8Special,
    /// The quasi Voronoi-reduced basis of `E_6` with half-integer Gram entries.
    #[serde(rename = "E6q")]
    E6Quasi,
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "mimo")]
    RandomMimo,
}

impl LatticeFamily {
    /// Families for which folding by basis permutations is defined.
    pub fn is_root(self) -> bool {
        matches!(self, LatticeFamily::A | LatticeFamily::D | LatticeFamily::E)
    }

    pub fn supports(self, n: usize) -> bool {
        match self {
            LatticeFamily::A | LatticeFamily::Z => n >= 2,
            LatticeFamily::D => n >= 3,
            LatticeFamily::E => (6..=8).contains(&n),
            LatticeFamily::E8Special => n == 8,
            LatticeFamily::E6Quasi => n == 6,
            LatticeFamily::RandomMimo => n >= 2 && n.is_multiple_of(2),
        }
    }

    pub(crate) fn check(self, n: usize) -> Result<()> {
        if self.supports(n) {
            Ok(())
        } else {
            Err(Error::Unsupported { family: self.to_string(), n })
        }
    }
}

impl fmt::Display for LatticeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LatticeFamily::A => "A",
            LatticeFamily::D => "D",
            LatticeFamily::E => "E",
            LatticeFamily::E8Special => "E8",
            LatticeFamily::E6Quasi => "E6q",
            LatticeFamily::Z => "Z",
            LatticeFamily::RandomMimo => "mimo",
        };
        f.write_str(s)
    }
}

impl FromStr for LatticeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "A" | "a" | "A_n" => LatticeFamily::A,
            "D" | "d" | "D_n" => LatticeFamily::D,
            "E" | "e" | "E_n" => LatticeFamily::E,
            "E8" | "e8" | "E8-special" => LatticeFamily::E8Special,
            "E6q" | "e6q" | "E6-quasi" => LatticeFamily::E6Quasi,
            "Z" | "z" | "Z_n" => LatticeFamily::Z,
            "mimo" | "random-MIMO" => LatticeFamily::RandomMimo,
            other => return Err(Error::InvalidParameter(format!("unknown lattice family `{other}`"))),
        })
    }
}

/// A symmetric matrix with entries in `½ℤ`, stored as twice its value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfIntegerMatrix {
    n: usize,
    twice: Vec<i64>,
}

impl HalfIntegerMatrix {
    fn from_fn(n: usize, f: impl Fn(usize, usize) -> i64) -> Self {
        let twice = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self { n, twice }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Twice the entry at `(i, j)`.
    pub fn twice(&self, i: usize, j: usize) -> i64 {
        self.twice[i * self.n + j]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.twice(i, j) as f64 / 2.0
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

const E8_SPECIAL: [[i64; 8]; 8] = [
    [4, 2, 0, 2, 2, 2, 2, 2],
    [2, 4, 2, 0, 2, 2, 2, 2],
    [0, 2, 4, 0, 2, 2, 0, 0],
    [2, 0, 0, 4, 2, 2, 0, 0],
    [2, 2, 2, 2, 4, 2, 2, 0],
    [2, 2, 2, 2, 2, 4, 0, 2],
    [2, 2, 0, 0, 2, 0, 4, 0],
    [2, 2, 0, 0, 0, 2, 0, 4],
];

// Twice the entries: 3 -> 6, 1.5 -> 3.
const E6_QUASI_TWICE: [[i64; 6]; 6] = [
    [6, 3, 0, 0, 3, 3],
    [3, 6, 0, 0, 3, 3],
    [0, 0, 6, 3, 3, 3],
    [0, 0, 3, 6, 3, 3],
    [3, 3, 3, 3, 6, 3],
    [3, 3, 3, 3, 3, 6],
];

/// Exact Gram matrix of a structured family.
pub fn gram_for_family(family: LatticeFamily, n: usize) -> Result<HalfIntegerMatrix> {
    family.check(n)?;
    let jpi = |i: usize, j: usize| if i == j { 4 } else { 2 };
    let g = match family {
        LatticeFamily::A => HalfIntegerMatrix::from_fn(n, jpi),
        LatticeFamily::D => HalfIntegerMatrix::from_fn(n, |i, j| match (i.min(j), i.max(j)) {
            (0, 1) => 0,
            _ => jpi(i, j),
        }),
        LatticeFamily::E => HalfIntegerMatrix::from_fn(n, |i, j| match (i.min(j), i.max(j)) {
            (0, 1) | (0, 2) => 0,
            _ => jpi(i, j),
        }),
        LatticeFamily::E8Special => HalfIntegerMatrix::from_fn(8, |i, j| 2 * E8_SPECIAL[i][j]),
        LatticeFamily::E6Quasi => HalfIntegerMatrix::from_fn(6, |i, j| E6_QUASI_TWICE[i][j]),
        LatticeFamily::Z => HalfIntegerMatrix::from_fn(n, |i, j| if i == j { 2 } else { 0 }),
        LatticeFamily::RandomMimo => {
            return Err(Error::Unsupported { family: family.to_string(), n });
        }
    };
    Ok(g)
}
