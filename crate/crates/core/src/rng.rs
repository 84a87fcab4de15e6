//! Seeded random draws shared by every stochastic component.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic random stream. The same seed always yields the same
/// sequence of draws, independent of platform.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform on `[-1, 1]`, the perturbation scale of the neighbour search.
    pub fn phi(&mut self) -> f64 {
        self.inner.gen_range(-1.0..=1.0)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + self.unit() * (hi - lo)
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Uniform index in `0..n` that is never `exclude`. Requires `n >= 2`.
    pub fn index_except(&mut self, n: usize, exclude: usize) -> usize {
        debug_assert!(n >= 2 && exclude < n);
        let k = self.index(n - 1);
        if k >= exclude {
            k + 1
        } else {
            k
        }
    }

    /// Standard normal draw (Box-Muller).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
