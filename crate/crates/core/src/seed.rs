//! Deterministic seed splitting.
//!
//! Every random stage draws from a `ChaCha8Rng` whose seed is derived from the
//! master seed and a path of stage/item labels, so results never depend on
//! the order in which parallel work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STAGE_SYNTH: u64 = 1;
pub const STAGE_CUBOIDS: u64 = 2;
pub const STAGE_BANK: u64 = 3;
pub const STAGE_CLASSIFIER: u64 = 4;
pub const STAGE_KMEANS: u64 = 5;
pub const STAGE_SHARED_DICT: u64 = 6;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a label path.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Stable 64-bit label for a string (FNV-1a), for use in derivation paths.
pub fn label(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
