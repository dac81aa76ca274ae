//! Seed derivation.
//!
//! One master seed fans out to independent sub-seeds by hashing a path of
//! labels with SplitMix64; each sub-seed drives a ChaCha8 generator. The same
//! path always yields the same generator, whatever else ran before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Labels for the first component of a derivation path.
pub mod purpose {
    pub const GENERATOR: u64 = 1;
    pub const INTERLEAVE: u64 = 2;
    pub const SAMPLING: u64 = 3;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &label| splitmix64(acc ^ splitmix64(label)))
}

pub fn rng_for(master: u64, path: &[u64]) -> SeededRng {
    SeededRng::seed_from_u64(derive_seed(master, path))
}
