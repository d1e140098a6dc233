//! Deterministic random streams.
//!
//! Every random decision in the crate is drawn from [`DetRng`], a ChaCha8
//! stream cipher used as a counter-based generator. The 256-bit key is built
//! from a 64-bit seed by running SplitMix64 four times and writing each output
//! little-endian; the nonce and block counter start at zero. The derived
//! helpers below (`below`, `chance`, `shuffle`) are defined here instead of
//! borrowed from a distribution library so the byte stream they consume is
//! fixed by this file alone:
//!
//! * `below(n)`: draw `u64` words until `w < n * floor(2^64 / n)`, return `w % n`.
//! * `chance(p)`: one word, `(w >> 11) * 2^-53 < p`.
//! * `shuffle`: Fisher-Yates from the last index down, `j = below(i + 1)`.
//!
//! Per-item seeds come from [`derive_seed`], which hashes the parent seed, a
//! tag, and an index with FNV-1a and finishes with the SplitMix64 mixer.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `(parent, tag, index)`.
pub fn derive_seed(parent: u64, tag: &str, index: u64) -> u64 {
    let mut h = FNV_OFFSET;
    let bytes = parent
        .to_le_bytes()
        .into_iter()
        .chain(tag.bytes())
        .chain([0u8])
        .chain(index.to_le_bytes());
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    mix64(h)
}

pub struct DetRng {
    inner: ChaCha8Rng,
}

impl DetRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_mut(8) {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        Self {
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    /// Independent stream for a named sub-task.
    pub fn fork(seed: u64, tag: &str, index: u64) -> Self {
        Self::new(derive_seed(seed, tag, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform integer in `0..n`. Panics when `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = (u64::MAX / n) * n;
        loop {
            let w = self.next_u64();
            if w < zone {
                return (w % n) as usize;
            }
        }
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        lo + self.below((hi - lo + 1) as usize) as u64
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
