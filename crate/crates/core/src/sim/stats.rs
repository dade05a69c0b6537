use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::lattice::{derive_seed, rng};

/// Fixed shard count, so results do not depend on the worker count.
pub const SHARDS: usize = 64;

/// Two-sided 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Independent random stream for shard `index` of a run seeded with `seed`.
pub fn shard_rng(seed: u64, index: usize) -> ChaCha12Rng {
    rng(derive_seed(seed, index as u64))
}

/// Splits `total` items over the shards and runs `f(shard, rng, count)` in parallel.
/// Results come back in shard order.
pub fn run_sharded<T, F>(seed: u64, total: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha12Rng, u64) -> T + Sync,
{
    let base = total / SHARDS as u64;
    let extra = total % SHARDS as u64;
    (0..SHARDS)
        .into_par_iter()
        .map(|s| {
            let count = base + u64::from((s as u64) < extra);
            let mut r = shard_rng(seed, s);
            f(s, &mut r, count)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036_995).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403_831).abs() < 1e-5 && (hi - 0.596_169).abs() < 1e-5);
    }

    #[test]
    fn shards_cover_total() {
        let counts = run_sharded(1, 1000, |_, _, c| c);
        assert_eq!(counts.iter().sum::<u64>(), 1000);
        assert_eq!(counts.len(), SHARDS);
    }
}
