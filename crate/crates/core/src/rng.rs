//! Per-path random streams.
//!
//! Every path owns a generator seeded from a hash of `(master_seed,
//! path_index)`, so a path's draws do not depend on which thread runs it or
//! on how many other paths exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for path `path_index` under `master_seed`.
pub fn path_seed(master_seed: u64, path_index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(path_index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

pub fn path_rng(master_seed: u64, path_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(path_seed(master_seed, path_index))
}
