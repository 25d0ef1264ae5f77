//! Seed management.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a `u64`.
//! Child seeds are derived with a splitmix64 mix of `(parent, stream)`, so
//! adding streams (more replicas, more noise modes) never reshuffles the
//! streams that already exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type SimRng = ChaCha8Rng;

/// Stream tags used to keep independent sources on disjoint seed streams.
pub mod stream {
    pub const DRIVER: u64 = 0x6472_6976_6572;
    pub const FAST: u64 = 0x6661_7374;
    pub const HISTORY: u64 = 0x6869_7374;
    pub const AUX: u64 = 0x0061_7578;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic child seed for stream `index` of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_normals(rng: &mut SimRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

#[inline]
pub fn standard_normal(rng: &mut SimRng) -> f64 {
    StandardNormal.sample(rng)
}
