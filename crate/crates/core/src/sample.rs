//! Seeded random sample points.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sym::{SymbolId, Q};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20240611;

/// Grid resolution of exact sample coordinates.
const GRID: i64 = 1000;

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn below(&mut self, n: u64) -> u64 {
        // rejection sampling keeps the draw unbiased
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.rng.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    /// Exact rational uniform on a grid of step `1/1000` in `[lo, hi]`.
    pub fn rational(&mut self, lo: i64, hi: i64) -> Q {
        let span = ((hi - lo) * GRID) as u64 + 1;
        let n = lo * GRID + self.below(span) as i64;
        Q::new(BigInt::from(n), BigInt::from(GRID))
    }

    /// Uniform double in `[lo, hi)`.
    pub fn real(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    pub fn point(&mut self, ids: &[SymbolId], lo: i64, hi: i64) -> BTreeMap<SymbolId, Q> {
        ids.iter().map(|&s| (s, self.rational(lo, hi))).collect()
    }

    pub fn points(&mut self, ids: &[SymbolId], count: usize) -> Vec<BTreeMap<SymbolId, Q>> {
        (0..count).map(|_| self.point(ids, 1, 10)).collect()
    }
}
