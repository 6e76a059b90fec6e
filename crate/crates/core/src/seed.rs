//! Seed derivation.
//!
//! Every random stream is keyed by a root seed plus a stream index, mixed
//! with SplitMix64, so tree `k` of a forest always sees the same bootstrap
//! regardless of the order in which trees are grown.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags used when deriving child seeds from a root seed.
pub mod stream {
    pub const SIMULATION: u64 = 0x5349_4d55;
    pub const BOOTSTRAP: u64 = 0x424f_4f54;
    pub const BACKGROUND: u64 = 0x4241_434b;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index)
}

pub fn rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, index))
}
