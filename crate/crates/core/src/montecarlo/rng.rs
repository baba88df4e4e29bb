//! Reproducible uniform streams.
//!
//! Every replicate owns a ChaCha8 key derived from the plan seed and the
//! replicate index, so results never depend on which worker ran it. Extra
//! independent draws inside a replicate use separate ChaCha stream ids.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_POW_M53: f64 = 1.0 / 9_007_199_254_740_992.0;

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `r` of a plan seeded with `seed`.
pub fn replicate_seed(seed: u64, r: u64) -> u64 {
    seed ^ splitmix64(r)
}

/// A uniform on the open unit interval together with its complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unit {
    pub p: f64,
    /// `1 − p`.
    pub q: f64,
}

impl Unit {
    pub fn new(p: f64) -> Self {
        Self { p, q: 1.0 - p }
    }
}

pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Independent stream `stream` under the same key.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform on `(0, 1)`: `(k + 1/2) / 2⁵³` for a 53-bit `k`.
    pub fn next_unit(&mut self) -> Unit {
        let k = self.rng.next_u64() >> 11;
        let p = (k as f64 + 0.5) * TWO_POW_M53;
        // Complement from the integer so tails keep full precision.
        let q = ((9_007_199_254_740_992 - k) as f64 - 0.5) * TWO_POW_M53;
        Unit { p, q }
    }
}
