use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256StarStar};

/// Seedable 64-bit generator: xoshiro256** with its state filled by SplitMix64.
///
/// Both algorithms use only wrapping adds, xor, shifts, rotates and
/// multiplies on `u64`, so a seed yields the same stream on every platform.
/// Independent streams for sharded work come from [`Rng::for_stream`], which
/// mixes a stream index into the seed before expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rng {
    inner: Xoshiro256StarStar,
}

fn splitmix64(x: u64) -> u64 {
    SplitMix64::seed_from_u64(x).next_u64()
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { inner: Xoshiro256StarStar::seed_from_u64(seed) }
    }

    /// Generator for stream `stream` of base seed `seed`.
    ///
    /// The derived seed is `splitmix64(seed ^ splitmix64(stream))`, so
    /// distinct stream indices give unrelated states.
    pub fn for_stream(seed: u64, stream: u64) -> Self {
        Rng::new(splitmix64(seed ^ splitmix64(stream)))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in the open interval `(0, 1)`.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
    }

    /// Standard exponential variate.
    pub fn next_exp(&mut self) -> f64 {
        -self.next_open01().ln()
    }
}
