//! Seeding conventions.
//!
//! All randomness flows from 64-bit seeds through ChaCha8, a counter-based
//! generator. Independent purposes inside one seed use distinct ChaCha
//! streams; per-trial seeds come from [`derive_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids used by the samplers and experiment drivers.
pub mod stream {
    pub const POSITIONS: u64 = 0;
    pub const EDGES_0: u64 = 1;
    pub const EDGES_1: u64 = 2;
    pub const PERTURB: u64 = 3;
    pub const COIN: u64 = 4;
    pub const HEURISTIC: u64 = 5;
    pub const COUPLED: u64 = 6;
}

/// SplitMix64 finaliser.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `index` of a run seeded with `seed`:
/// `splitmix64(seed ^ splitmix64(index))`.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// ChaCha8 generator for `(seed, stream)`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
