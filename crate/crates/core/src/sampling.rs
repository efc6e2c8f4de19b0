//! Seeded, reproducible sampling of sparse dyadic vectors.

use alloc::vec::Vec;

use num_bigint::BigInt;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::exactvec::{Rational, SparseVector};

/// A deterministic random source keyed by a seed and a stream label.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { rng }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, n)`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        ((self.rng.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Uniform in `[lo, hi]`.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi, "empty range");
        lo + self.below((hi - lo) as u64 + 1) as i64
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Random vector on `coords` with at most `max_support` nonzero entries
    /// of the form `k / 2^e`, `e <= max_den_exp`, `|k| <= max_num`.
    pub fn dyadic_vector(&mut self, coords: &[usize], max_support: usize, max_den_exp: u32, max_num: i64) -> SparseVector {
        if coords.is_empty() || max_support == 0 {
            return SparseVector::zero();
        }
        let size = 1 + self.below(max_support.min(coords.len()) as u64) as usize;
        let mut pool: Vec<usize> = coords.to_vec();
        self.shuffle(&mut pool);
        SparseVector::from_pairs(pool.into_iter().take(size).map(|i| {
            let e = self.below(max_den_exp as u64 + 1) as u32;
            let k = self.range_i64(-max_num, max_num);
            (i, Rational::new(BigInt::from(k), BigInt::from(1u64) << e))
        }))
    }

    /// Like [`Sampler::dyadic_vector`] but never zero.
    pub fn nonzero_dyadic_vector(&mut self, coords: &[usize], max_support: usize, max_den_exp: u32, max_num: i64) -> SparseVector {
        assert!(!coords.is_empty() && max_support > 0 && max_num > 0, "no nonzero vector available");
        loop {
            let v = self.dyadic_vector(coords, max_support, max_den_exp, max_num);
            if !v.is_zero() {
                return v;
            }
        }
    }
}
