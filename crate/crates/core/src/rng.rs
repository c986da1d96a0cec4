//! Counter-keyed random streams.
//!
//! Every stream is a ChaCha8 generator whose key is derived from a 64-bit
//! experiment seed and a tuple of structural indices (a role tag plus up to
//! two indices). Two streams with different tuples are independent, and a
//! stream's output never depends on which other streams were consumed first.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Part of the key, so roles never share draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Role {
    Signature = 1,
    Body = 2,
    Activity = 3,
    Message = 4,
    Noise = 5,
    KernelOracle = 6,
    Trial = 7,
    Codebook = 8,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds the key tuple into a single 64-bit value.
pub fn derive(seed: u64, role: Role, a: u64, b: u64) -> u64 {
    let mut h = mix64(seed ^ GOLDEN);
    for word in [role as u64, a, b] {
        h = mix64(h.wrapping_add(GOLDEN) ^ mix64(word.wrapping_add(GOLDEN)));
    }
    h
}

/// Opens the stream keyed by `(seed, role, a, b)`.
pub fn stream(seed: u64, role: Role, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut h = derive(seed, role, a, b);
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&h.to_le_bytes());
        h = mix64(h.wrapping_add(GOLDEN));
    }
    ChaCha8Rng::from_seed(key)
}
