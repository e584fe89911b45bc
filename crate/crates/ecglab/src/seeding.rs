//! Deterministic RNG stream derivation.
//!
//! Every stochastic routine takes a `u64` seed and derives independent
//! ChaCha streams keyed by `(seed, domain, index)`.  Results are therefore
//! reproducible across runs and independent of worker count: a parallel map
//! over indices yields the same values as a sequential loop.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keeping the derived streams of different subsystems disjoint.
pub mod domain {
    pub const BOUNDARY_SAMPLE: u64 = 0x01;
    pub const TILTED_PROPOSAL: u64 = 0x02;
    pub const SERIES: u64 = 0x03;
    pub const REPLICATE: u64 = 0x04;
    pub const STABLE_DIRECT: u64 = 0x05;
    pub const PATTERSON: u64 = 0x06;
    pub const VALIDATE: u64 = 0x07;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `(seed, domain, index)` into a single stream seed.
pub fn derive_seed(master: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(domain)) ^ index)
}

/// A ChaCha stream for `(master, domain, index)`.
pub fn stream(master: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, domain, index))
}
