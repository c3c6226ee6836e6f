//! Seed derivation for reproducible fan-out.
//!
//! Every stochastic work item (one graph, one algorithm rerun, one sample)
//! draws from its own generator, seeded from the master seed and the item's
//! coordinates. Results therefore do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of coordinates into a sub-seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &x| splitmix64(acc ^ splitmix64(x)))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shorthand for `rng_from_seed(derive_seed(master, path))`.
pub fn derived_rng(master: u64, path: &[u64]) -> Rng {
    rng_from_seed(derive_seed(master, path))
}

// Stream tags that keep sub-seeds of different purposes apart.
pub const TAG_GRAPH: u64 = 0x67_7261_7068;
pub const TAG_DIST: u64 = 0x6469_7374;
pub const TAG_PERTURB: u64 = 0x7065_7274;
pub const TAG_SAMPLE: u64 = 0x7361_6d70;
pub const TAG_REFERENCE: u64 = 0x7265_6673;
