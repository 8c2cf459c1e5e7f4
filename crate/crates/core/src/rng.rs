//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit `&mut RandomStream`. Streams are
//! never shared between workers; independent streams are obtained by deriving
//! a child seed from a parent seed and a list of integer tags.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The deterministic generator used throughout the crate.
pub type RandomStream = ChaCha12Rng;

/// Create a stream from a 64-bit seed.
pub fn stream(seed: u64) -> RandomStream {
    RandomStream::seed_from_u64(seed)
}

/// Derive a child seed from `seed` and `tags`.
///
/// Uses the SplitMix64 finalizer as a mixing function, so nearby tags give
/// unrelated seeds.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut h = splitmix(seed ^ 0x5851_f42d_4c95_7f2d);
    for &t in tags {
        h = splitmix(h ^ splitmix(t.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

/// Stream seeded from `derive_seed(seed, tags)`.
pub fn substream(seed: u64, tags: &[u64]) -> RandomStream {
    stream(derive_seed(seed, tags))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
