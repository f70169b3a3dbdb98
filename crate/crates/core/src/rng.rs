//! Seeding.
//!
//! Every random stream in the crate is a ChaCha8 generator
//! ([`rand_chacha::ChaCha8Rng`]) seeded from a single `u64`. ChaCha output
//! is specified bit-for-bit and independent of platform and endianness.
//! Replication seeds are derived from a master seed with SplitMix64
//! finalization so that they do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of keys into a seed: `h ← splitmix64(h ⊕ key)`.
pub fn derive_seed(master: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(master), |h, &k| splitmix64(h ^ k))
}

/// Seed of replication `rep` for parameter set `params_id` at sample size `n`.
pub fn replication_seed(master: u64, params_id: usize, n: usize, rep: usize) -> u64 {
    derive_seed(master, &[params_id as u64, n as u64, rep as u64])
}
