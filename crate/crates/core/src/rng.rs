//! Seeded randomness.
//!
//! All stochastic routines draw from ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, which is specified independently of the
//! host platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for the `index`-th independent stream derived from `seed`.
///
/// Trials use `seed + index` so that a single trial can be replayed from the
/// report alone.
pub fn derive(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index)
}
