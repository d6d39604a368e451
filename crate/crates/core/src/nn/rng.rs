//! Seeded randomness.
//!
//! Every stochastic step in the crate (sampling, shuffling, weight init)
//! draws from [`Rng`], a thin wrapper over ChaCha8 keyed by a 64-bit seed.
//! The same seed always yields the same draw sequence, so datasets, splits,
//! and trained models are reproducible bit for bit.
//!
//! Independent streams are derived by seed-splitting:
//! `child_seed = mix64(parent_seed ^ mix64(index + GOLDEN))`, with `mix64`
//! the SplitMix64 finalizer. Named children hash the name with FNV-1a first.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    hash
}

#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child stream; see the module docs for the rule.
    pub fn child(&self, index: u64) -> Rng {
        Rng::new(mix64(self.seed ^ mix64(index.wrapping_add(GOLDEN))))
    }

    /// Child stream keyed by a stable name (e.g. a method identifier), so the
    /// same name gets the same stream regardless of enumeration order.
    pub fn child_named(&self, name: &str) -> Rng {
        self.child(fnv1a(name.as_bytes()))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        self.inner.random_range(0..n)
    }

    /// Fisher-Yates shuffle in place.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }

    /// Standard normal draw via the Box-Muller transform. Two uniform draws
    /// per sample; the sine half of the pair is discarded to keep the state
    /// a plain function of the draw count.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1]: keeps the log finite
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Samples an isotropic Gaussian vector: each coordinate is independently
/// `normal(mean[j], stddev^2)`.
pub fn gaussian_sample(rng: &mut Rng, mean: &[f64], stddev: f64) -> Result<Vec<f64>> {
    if !(stddev > 0.0) {
        return Err(Error::argument(format!(
            "stddev must be positive, got {stddev}"
        )));
    }
    Ok(mean.iter().map(|&m| m + stddev * rng.normal()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_f64().to_bits(), b.next_f64().to_bits());
        }
    }

    #[test]
    fn children_are_independent_streams() {
        let root = Rng::new(7);
        let mut c0 = root.child(0);
        let mut c1 = root.child(1);
        let first: Vec<u64> = (0..8).map(|_| c0.next_f64().to_bits()).collect();
        let second: Vec<u64> = (0..8).map(|_| c1.next_f64().to_bits()).collect();
        assert_ne!(first, second);
        // Re-deriving the same child reproduces its stream.
        let mut again = root.child(0);
        let redo: Vec<u64> = (0..8).map(|_| again.next_f64().to_bits()).collect();
        assert_eq!(first, redo);
    }

    #[test]
    fn named_child_is_stable() {
        let root = Rng::new(9);
        assert_eq!(root.child_named("agnostic").seed(), root.child_named("agnostic").seed());
        assert_ne!(root.child_named("agnostic").seed(), root.child_named("bias-aware").seed());
    }

    #[test]
    fn gaussian_rejects_nonpositive_stddev() {
        let mut rng = Rng::new(1);
        assert!(gaussian_sample(&mut rng, &[0.0], 0.0).is_err());
        assert!(gaussian_sample(&mut rng, &[0.0], -1.0).is_err());
    }

    #[test]
    fn gaussian_degenerate_stddev_collapses_to_mean() {
        let mut rng = Rng::new(3);
        let v = gaussian_sample(&mut rng, &[2.0, 1.0], 1e-12).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-9);
        assert!((v[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_sample_mean_matches_monte_carlo() {
        // 10000 draws at mean (2, 1), stddev 1: sample mean within 0.05.
        let mut rng = Rng::new(123);
        let mut sum = [0.0f64; 2];
        let n = 10_000;
        for _ in 0..n {
            let v = gaussian_sample(&mut rng, &[2.0, 1.0], 1.0).unwrap();
            sum[0] += v[0];
            sum[1] += v[1];
        }
        assert!((sum[0] / n as f64 - 2.0).abs() < 0.05);
        assert!((sum[1] / n as f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn gaussian_sample_deterministic() {
        let mut a = Rng::new(55);
        let mut b = Rng::new(55);
        let va = gaussian_sample(&mut a, &[0.0; 4], 2.0).unwrap();
        let vb = gaussian_sample(&mut b, &[0.0; 4], 2.0).unwrap();
        assert_eq!(va, vb);
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = Rng::new(8);
        let mut xs: Vec<usize> = (0..50).collect();
        rng.shuffle(&mut xs);
        let mut sorted = xs.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
    }
}
