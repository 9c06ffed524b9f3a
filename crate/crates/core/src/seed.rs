//! Deterministic seed derivation.
//!
//! Every run gets its own ChaCha8 stream whose seed is a SplitMix64 mix of
//! the base seed and a path of integers (run index, or item and bin). Runs
//! never share a stream, so results do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used for all simulation.
pub type SimRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `base` with each path component in order. Order matters:
/// `[k, m]` and `[m, k]` give different seeds.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(base), |acc, &c| {
        splitmix64(acc ^ splitmix64(c.wrapping_add(GOLDEN)))
    })
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
