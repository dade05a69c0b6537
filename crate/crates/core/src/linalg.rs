use nalgebra::DMatrix;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Row vector times matrix.
pub(crate) fn vec_mat(y: &[f64], m: &DMatrix<f64>) -> Vec<f64> {
    debug_assert_eq!(y.len(), m.nrows());
    (0..m.ncols()).map(|j| (0..m.nrows()).map(|i| y[i] * m[(i, j)]).sum()).collect()
}

/// Householder reflection `H` with `e1·H = u` (and `H·e1 = u`) for a unit vector `u`.
/// Returns the identity when `u` is already `e1`.
pub(crate) fn householder_to(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut w = vec![0.0; n];
    w[0] = 1.0;
    for (wi, ui) in w.iter_mut().zip(u) {
        *wi -= ui;
    }
    let ww = norm2(&w);
    if ww < 1e-24 {
        return DMatrix::identity(n, n);
    }
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - 2.0 * w[i] * w[j] / ww
    })
}

pub(crate) fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}
