//! Deterministic seed and stream derivation.
//!
//! Every repetition of an ensemble draws from its own ChaCha stream keyed by
//! (master seed, repetition index), so results are independent of execution
//! order and worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent reproducible generator for one repetition.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Stable child seed (splitmix64 finalizer over master ⊕ salted index).
pub fn derive_seed(master_seed: u64, salt: u64) -> u64 {
    let mut z = master_seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
