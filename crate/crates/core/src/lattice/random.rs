use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use super::GeneratorMatrix;
use crate::{Error, Result};

/// Singular draws are re-sampled with `seed + 1`; give up after this many tries.
const MAX_REDRAWS: u64 = 64;

/// Mixes a base seed with an index (SplitMix64 finalizer) for per-item seed streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Real `2m × 2m` embedding of an `m × m` complex channel with i.i.d. `CN(0, 1)` entries.
/// Each complex entry `a + ib` becomes the block `[[a, −b], [b, a]]`.
pub fn random_mimo_generator(half_n: usize, seed: u64) -> Result<GeneratorMatrix> {
    Ok(random_mimo_with_seed(half_n, seed)?.0)
}

/// Like [`random_mimo_generator`], also returning the seed actually used after re-draws.
pub fn random_mimo_with_seed(half_n: usize, seed: u64) -> Result<(GeneratorMatrix, u64)> {
    if half_n == 0 {
        return Err(Error::InvalidParameter("half_n must be at least 1".into()));
    }
    let normal = Normal::new(0.0, 0.5f64.sqrt()).expect("valid normal");
    redraw(seed, |s| {
        let mut r = rng(s);
        let n = 2 * half_n;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..half_n {
            for j in 0..half_n {
                let re = normal.sample(&mut r);
                let im = normal.sample(&mut r);
                g[(2 * i, 2 * j)] = re;
                g[(2 * i, 2 * j + 1)] = -im;
                g[(2 * i + 1, 2 * j)] = im;
                g[(2 * i + 1, 2 * j + 1)] = re;
            }
        }
        g
    })
}

/// `n × n` generator with i.i.d. real `N(0, 1)` entries.
pub fn random_gaussian_generator(n: usize, seed: u64) -> Result<(GeneratorMatrix, u64)> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let normal = Normal::new(0.0, 1.0).expect("valid normal");
    redraw(seed, |s| {
        let mut r = rng(s);
        DMatrix::from_fn(n, n, |_, _| normal.sample(&mut r))
    })
}

fn redraw(seed: u64, draw: impl Fn(u64) -> DMatrix<f64>) -> Result<(GeneratorMatrix, u64)> {
    let mut last = 0.0;
    for k in 0..MAX_REDRAWS {
        let s = seed.wrapping_add(k);
        let g = draw(s);
        last = g.determinant();
        if last.abs() >= 1e-12 {
            return Ok((GeneratorMatrix::new(g)?, s));
        }
    }
    Err(Error::Singular { det: last })
}
