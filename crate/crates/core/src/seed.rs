//! Seed derivation. Every random stage draws from a ChaCha stream selected by
//! a (seed, stage, index) triple so that layers and restarts are independent
//! and reproducible regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stage tags mixed into the seed.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stage {
    Generate = 1,
    Sparsify = 2,
    TestMatrix = 3,
    KMeans = 4,
    Padding = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a stage tag into a user seed.
pub(crate) fn derive(seed: u64, stage: Stage) -> u64 {
    splitmix64(seed ^ splitmix64(stage as u64))
}

/// Counter-based stream `index` of the generator keyed by `(seed, stage)`.
pub(crate) fn stream(seed: u64, stage: Stage, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, stage));
    rng.set_stream(index);
    rng
}
