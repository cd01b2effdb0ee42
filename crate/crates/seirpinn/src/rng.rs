//! Counter-based pseudo-random generator used for every seeded draw in the
//! crate (observation sampling, weight init, BO initial design).
//!
//! SplitMix64: the i-th output is a bijective mix of `seed + i * GAMMA`, so
//! streams are reproducible bit-for-bit from the recorded seed alone. The
//! algorithm name is exposed for run manifests.

/// Weyl increment from the reference implementation.
const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Name recorded in run metadata next to every seed.
pub const ALGORITHM: &str = "splitmix64";

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of mantissa.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
