use nalgebra::DMatrix;

use crate::linalg::vec_mat;
use crate::{Error, Result};

/// Full-rank basis of a lattice; rows are the basis vectors `g_i`.
///
/// Gram matrix, inverse and volume are computed once at construction.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    g: DMatrix<f64>,
    flat: Vec<f64>,
    gram: DMatrix<f64>,
    inverse: DMatrix<f64>,
    volume: f64,
}

impl GeneratorMatrix {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        let n = g.nrows();
        if n == 0 || g.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: g.ncols() });
        }
        let det = g.determinant();
        if !det.is_finite() || det.abs() <= crate::EPS {
            return Err(Error::Singular { det });
        }
        let inverse = g.clone().try_inverse().ok_or(Error::Singular { det })?;
        let gram = &g * g.transpose();
        let flat = (0..n * n).map(|k| g[(k / n, k % n)]).collect();
        Ok(Self { g, flat, gram, inverse, volume: det.abs() })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// `vol(Λ) = |det G|`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.flat[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.row(i).to_vec()).collect()
    }

    /// Lattice point `z·G`.
    pub fn point(&self, z: &[i64]) -> Vec<f64> {
        let n = self.n();
        let mut x = vec![0.0; n];
        for (i, &zi) in z.iter().enumerate() {
            if zi != 0 {
                let zi = zi as f64;
                for (xj, gj) in x.iter_mut().zip(self.row(i)) {
                    *xj += zi * gj;
                }
            }
        }
        x
    }

    /// Real point `a·G` for real coefficients.
    pub fn combine(&self, a: &[f64]) -> Vec<f64> {
        vec_mat(a, &self.g)
    }

    /// Basis coordinates `y·G⁻¹`.
    pub fn coords(&self, y: &[f64]) -> Vec<f64> {
        vec_mat(y, &self.inverse)
    }

    pub(crate) fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() == self.n() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.n(), got: y.len() })
        }
    }

    /// Basis with rows permuted so that row `k` of the result is row `perm[k]` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        Self::new(DMatrix::from_fn(n, n, |i, j| self.g[(perm[i], j)]))
    }

    /// Basis rotated by an orthogonal matrix: `G·Q`.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Result<Self> {
        Self::new(&self.g * q)
    }
}

/// Lower-triangular generator with `G·Gᵀ = Γ` (Cholesky factor).
pub fn generator_from_gram(gram: &DMatrix<f64>) -> Result<GeneratorMatrix> {
    let n = gram.nrows();
    if gram.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: gram.ncols() });
    }
    if (gram - gram.transpose()).amax() > crate::EPS {
        return Err(Error::NotPositiveDefinite);
    }
    let chol = gram.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    GeneratorMatrix::new(chol.l())
}

/// `(G⁻¹)ᵀ`, a generator of the dual lattice.
pub fn dual_generator(g: &GeneratorMatrix) -> Result<GeneratorMatrix> {
    if g.volume() < 1e-12 {
        return Err(Error::Singular { det: g.volume() });
    }
    GeneratorMatrix::new(g.inverse().transpose())
}
