//! Counter-based seeding.
//!
//! Every random draw in the crate comes from a ChaCha stream whose seed is a
//! hash of the user seed and the coordinates of the draw (tick, sensor, zone,
//! trial...). Evaluation order therefore never changes results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a seed and a list of coordinates into one 64-bit key.
pub fn derive_key(seed: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(mix64(seed), |acc, &c| mix64(acc ^ mix64(c)))
}

pub fn stream(seed: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_key(seed, coords))
}
