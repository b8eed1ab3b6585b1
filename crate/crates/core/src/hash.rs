//! Small fixed integer hash primitives.
//!
//! These are the only sources of pseudo-randomness inside the library and they
//! are specified exactly so that mock embeddings, prompt hashes, and index
//! seeding reproduce bit-for-bit on every platform.

/// FNV-1a 64-bit offset basis.
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
/// FNV-1a 64-bit prime.
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over a byte slice.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Incremental FNV-1a, for hashing several buffers as one stream.
#[derive(Debug, Clone)]
pub struct Fnv1a64(u64);

impl Fnv1a64 {
    pub fn new() -> Self {
        Fnv1a64(FNV_OFFSET)
    }

    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a64 {
    fn default() -> Self {
        Self::new()
    }
}

/// splitmix64 pseudo-random stream.
///
/// Advances `state` and returns the next value. Standard constants from the
/// reference implementation.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Maps a `u64` to `[-1, 1)` using the top 53 bits, exactly as an IEEE double.
pub fn to_unit_interval(x: u64) -> f64 {
    // (x >> 11) is in [0, 2^53); dividing by 2^53 gives [0, 1).
    let unit = (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    unit * 2.0 - 1.0
}
