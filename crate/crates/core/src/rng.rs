//! Deterministic random streams derived from a single master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based child seed: the `index`-th seed of stream `stream` under `master`.
pub fn child_seed(master: u64, stream: u64, index: u64) -> u64 {
    mix(mix(master ^ mix(stream)).wrapping_add(index))
}

/// Seed of probe trial `i`: `master XOR i`.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    master ^ trial
}
