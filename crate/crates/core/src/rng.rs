//! Reproducible random streams.
//!
//! Every stream is a ChaCha8 generator. The key is derived from a top-level
//! seed and a component or origin label with SplitMix64; the stream number
//! distinguishes simulation paths, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One SplitMix64 step.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for a named component.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    label
        .bytes()
        .fold(splitmix64(seed), |acc, b| splitmix64(acc ^ b as u64))
}

/// Generator for `(seed, key, stream)`.
pub fn stream(seed: u64, key: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(key)));
    rng.set_stream(stream);
    rng
}
