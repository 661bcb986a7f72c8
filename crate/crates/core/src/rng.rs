//! Seeded, independently addressable random streams.
//!
//! Every consumer (measurement noise, motion, placement, ...) draws from its
//! own ChaCha stream keyed by (seed, purpose, id), so adding an agent or a
//! consumer never perturbs the numbers another one sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Placement = 1,
    InitialPosition = 2,
    Noise = 3,
    Motion = 4,
    NetInit = 5,
    Explore = 6,
    Replay = 7,
    Episode = 8,
}

pub fn stream(seed: u64, purpose: Purpose, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 40) | (id & ((1 << 40) - 1)));
    rng
}

/// SplitMix64 finalizer; derives child seeds (e.g. per episode) from a parent.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
