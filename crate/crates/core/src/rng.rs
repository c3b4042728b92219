//! Deterministic random substreams and the local-hashing hash family.
//!
//! Every simulated user draws from its own generator seeded by mixing the
//! experiment seed with a path of indices (trial, user, collection, ...).
//! Results therefore do not depend on how users are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator type used for every per-user substream.
pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. Bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a path of indices into a single 64-bit seed.
pub fn substream_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed.wrapping_add(GOLDEN)), |acc, &step| {
        mix64(acc ^ mix64(step.wrapping_add(GOLDEN)).rotate_left(23)).wrapping_add(GOLDEN)
    })
}

/// A fresh generator for the substream identified by `path`.
pub fn substream(seed: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(substream_seed(seed, path))
}

/// Seeded hash of a category, as used by local hashing. Reduce mod `g` to get a bucket.
#[inline]
pub fn lh_hash(seed: u64, value: usize) -> u64 {
    mix64(seed ^ mix64((value as u64).wrapping_mul(GOLDEN).wrapping_add(0x632B_E59B_D9B4_E019)))
}

#[inline]
pub fn lh_bucket(seed: u64, value: usize, g: usize) -> usize {
    (lh_hash(seed, value) % g as u64) as usize
}
