//! Deterministic counter-based generator used by every randomized operation.
//!
//! SplitMix64: the state advances by a fixed odd constant and the output is
//! a bijective mix of the state, so the stream is a pure function of
//! `(seed, counter)`. Per-trial streams are derived as `seed ^ trial_index`,
//! which makes parallel trials order-independent.

/// SplitMix64 stream. Not cryptographic; used only for reproducible trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Stream for trial `trial_index` of a run seeded with `seed`.
    pub fn for_trial(seed: u64, trial_index: u64) -> Self {
        Self::new(seed ^ trial_index)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `[0, bound)` by rejection, so there is no modulo bias.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below(0) is meaningless");
        if bound.is_power_of_two() {
            return self.next_u64() & (bound - 1);
        }
        // largest multiple of bound that fits in u64
        let zone = u64::MAX - (u64::MAX % bound) - 1;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % bound;
            }
        }
    }

    /// Uniform value in `[lo, hi]` (inclusive).
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi);
        lo + self.below(hi - lo + 1)
    }
}
