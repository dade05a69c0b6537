use nalgebra::DMatrix;

use super::GeneratorMatrix;
use crate::linalg::dot;
use crate::{Error, Result};

/// LLL-reduced basis together with the unimodular `U` satisfying `reduced = U·G`.
#[derive(Clone, Debug)]
pub struct LllOutput {
    pub basis: GeneratorMatrix,
    pub transform: Vec<Vec<i64>>,
}

pub fn lll_reduce(g: &GeneratorMatrix, delta: f64) -> Result<GeneratorMatrix> {
    Ok(lll_with_transform(g, delta)?.basis)
}

pub fn lll_with_transform(g: &GeneratorMatrix, delta: f64) -> Result<LllOutput> {
    if !(delta > 0.25 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("LLL delta must lie in (0.25, 1], got {delta}")));
    }
    let n = g.n();
    let mut b = g.rows();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut bstar = vec![vec![0.0; n]; n];
    let mut bnorm = vec![0.0; n];
    let mut mu = vec![vec![0.0; n]; n];

    let orthogonalize = |k: usize, b: &[Vec<f64>], bstar: &mut [Vec<f64>], bnorm: &mut [f64], mu: &mut [Vec<f64>]| {
        let mut v = b[k].clone();
        for j in 0..k {
            let m = dot(&b[k], &bstar[j]) / bnorm[j];
            mu[k][j] = m;
            for (vi, sj) in v.iter_mut().zip(&bstar[j]) {
                *vi -= m * sj;
            }
        }
        bnorm[k] = dot(&v, &v);
        bstar[k] = v;
    };

    orthogonalize(0, &b, &mut bstar, &mut bnorm, &mut mu);
    let mut k = 1;
    let mut iterations = 0usize;
    while k < n {
        iterations += 1;
        if iterations > 1_000_000 {
            return Err(Error::InvalidParameter("LLL did not terminate (ill-conditioned basis)".into()));
        }
        for j in (0..k).rev() {
            let m = dot(&b[k], &bstar[j]) / bnorm[j];
            if m.abs() > 0.5 {
                let r = m.round();
                let ri = r as i64;
                for t in 0..n {
                    b[k][t] -= r * b[j][t];
                    u[k][t] -= ri * u[j][t];
                }
            }
        }
        orthogonalize(k, &b, &mut bstar, &mut bnorm, &mut mu);
        let m = mu[k][k - 1];
        if bnorm[k] >= (delta - m * m) * bnorm[k - 1] {
            k += 1;
            if k < n {
                orthogonalize(k, &b, &mut bstar, &mut bnorm, &mut mu);
            }
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            k = k.max(2) - 1;
            orthogonalize(k - 1, &b, &mut bstar, &mut bnorm, &mut mu);
            orthogonalize(k, &b, &mut bstar, &mut bnorm, &mut mu);
        }
    }

    // Rebuild the rows from the integer transform to shed accumulated rounding.
    let orig = g.matrix();
    let reduced = DMatrix::from_fn(n, n, |i, j| (0..n).map(|t| u[i][t] as f64 * orig[(t, j)]).sum());
    Ok(LllOutput { basis: GeneratorMatrix::new(reduced)?, transform: u })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_reduced(g: &GeneratorMatrix, delta: f64) {
        let b = g.rows();
        let n = b.len();
        let mut bstar: Vec<Vec<f64>> = Vec::new();
        let mut bn: Vec<f64> = Vec::new();
        for k in 0..n {
            let mut v = b[k].clone();
            let mut mus = Vec::new();
            for j in 0..k {
                let m = dot(&b[k], &bstar[j]) / bn[j];
                mus.push(m);
                assert!(m.abs() <= 0.5 + 1e-9, "size reduction fails: mu[{k}][{j}] = {m}");
                for (vi, s) in v.iter_mut().zip(&bstar[j]) {
                    *vi -= m * s;
                }
            }
            bn.push(dot(&v, &v));
            bstar.push(v);
            if k > 0 {
                let m = mus[k - 1];
                assert!(bn[k] >= (delta - m * m) * bn[k - 1] - 1e-9);
            }
        }
    }

    #[test]
    fn identity_unchanged() {
        let g = GeneratorMatrix::new(DMatrix::identity(4, 4)).unwrap();
        let r = lll_reduce(&g, 0.99).unwrap();
        assert!((r.matrix() - g.matrix()).amax() < 1e-15);
    }

    #[test]
    fn classic_2d_example() {
        let g = GeneratorMatrix::from_rows(&[vec![201.0, 37.0], vec![1648.0, 297.0]]).unwrap();
        let out = lll_with_transform(&g, 0.99).unwrap();
        check_reduced(&out.basis, 0.99);
        // Brute-force shortest vector over |z_i| <= 50.
        let mut best = f64::INFINITY;
        for a in -50i64..=50 {
            for b in -50i64..=50 {
                if a == 0 && b == 0 {
                    continue;
                }
                let x = g.point(&[a, b]);
                best = best.min(dot(&x, &x));
            }
        }
        let shortest = (0..2).map(|i| dot(out.basis.row(i), out.basis.row(i))).fold(f64::INFINITY, f64::min);
        assert!((shortest - best).abs() < 1e-6);
        assert!((out.basis.volume() - g.volume()).abs() < 1e-6 * g.volume());
    }

    #[test]
    fn rejects_bad_delta() {
        let g = GeneratorMatrix::new(DMatrix::identity(2, 2)).unwrap();
        assert!(lll_reduce(&g, 0.25).is_err());
        assert!(lll_reduce(&g, 1.01).is_err());
        assert!(lll_reduce(&g, 1.0).is_ok());
    }

    #[test]
    fn transform_is_consistent() {
        let g = GeneratorMatrix::from_rows(&[vec![1.0, 0.2, 3.1], vec![4.0, 1.9, -0.5], vec![-2.2, 7.0, 0.3]]).unwrap();
        let out = lll_with_transform(&g, 0.75).unwrap();
        check_reduced(&out.basis, 0.75);
        let u = DMatrix::from_fn(3, 3, |i, j| out.transform[i][j] as f64);
        assert!((u.determinant().abs() - 1.0).abs() < 1e-9);
        assert!((&u * g.matrix() - out.basis.matrix()).amax() < 1e-9);
    }
}
