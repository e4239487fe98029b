//! Deterministic random number generation.
//!
//! Every stochastic routine takes an explicit `u64` seed and draws from a
//! ChaCha20 stream (`rand_chacha::ChaCha20Rng`). ChaCha20 is a counter-based
//! generator whose output is fixed by the seed alone, so results are
//! reproducible across platforms and thread schedules.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SeededRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a row/task index (SplitMix64 finalizer), giving
/// independent streams for parallel work items without shared state.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
