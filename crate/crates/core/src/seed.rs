//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! keyed by a 64-bit seed mixed from a base seed and a path of tags, so that
//! streams are independent of execution order and thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags. Values are arbitrary but fixed; changing one changes every
/// derived stream that uses it.
pub mod tag {
    pub const STRUCTURE: u64 = 0x5354_5255;
    pub const EPISODE: u64 = 0x4550_4953;
    pub const CORE: u64 = 0x434f_5245;
    pub const DISTRACTOR: u64 = 0x4449_5354;
    pub const PARTIAL: u64 = 0x5041_5254;
    pub const SENSOR: u64 = 0x5345_4e53;
    pub const DRIVE: u64 = 0x4452_4956;
    pub const POLICY: u64 = 0x504f_4c49;
    pub const ACTIONS: u64 = 0x4143_5449;
    pub const BASELINE: u64 = 0x4241_5345;
    pub const INTERVENTION: u64 = 0x494e_5445;
    pub const OBSERVATIONAL: u64 = 0x4f42_5345;
    pub const PERMUTATION: u64 = 0x5045_524d;
    pub const FEATURES: u64 = 0x4645_4154;
    pub const CEM: u64 = 0x4345_4d00;
    pub const TRAIN: u64 = 0x5452_4149;
    pub const EVAL: u64 = 0x4556_414c;
    pub const SHUFFLE: u64 = 0x5348_5546;
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `parts` into `base`, in order.
pub fn derive(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(base: u64, parts: &[u64]) -> Rng {
    rng(derive(base, parts))
}
