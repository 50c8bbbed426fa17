//! Counter-based random streams.
//!
//! Every random quantity in the crate is drawn from a [`Stream`] whose key is
//! a hash of a tuple of integers (master seed, replica, row, column, ...).
//! A stream's `k`-th output depends only on its key and `k`, so matrices can
//! be filled in any order, or in parallel, and still be bit-identical.

use rand::RngCore;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer (Stafford variant 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes a tuple of words into a stream key. Order-sensitive.
pub fn derive_key(words: &[u64]) -> u64 {
    let mut h = 0x6a09_e667_f3bc_c908_u64;
    for &w in words {
        h = mix64(h ^ mix64(w.wrapping_add(GOLDEN_GAMMA)));
    }
    h
}

/// A SplitMix64 sequence started at a derived key.
#[derive(Debug, Clone)]
pub struct Stream {
    key: u64,
    counter: u64,
}

impl Stream {
    pub fn new(key: u64) -> Self {
        Stream { key, counter: 0 }
    }

    pub fn from_words(words: &[u64]) -> Self {
        Stream::new(derive_key(words))
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for Stream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}
