//! Deterministic RNG plumbing: every random quantity in the crate flows from
//! one master seed through ChaCha8 streams, with per-unit seeds derived by a
//! splitmix64 finalizer so parallel workers stay order-independent.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG for a top-level run.
pub fn master_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Statistically independent child seed for (master, stream index).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over a golden-ratio stride; a bijective mixer, so
    // distinct streams never collide for a fixed master seed.
    let mut z = master.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for a derived stream.
pub fn derived_rng(master: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream))
}
