//! Seed schedule for every random draw in the crate.
//!
//! The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`). The
//! 256-bit key comes from the 64-bit user seed through
//! `SeedableRng::seed_from_u64`. Independent units of work (one simulated
//! image, one bootstrap resample) each get their own ChaCha stream, numbered
//! by the unit's index. Output therefore depends only on `(seed, index)`, not
//! on how work is scheduled across threads.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for work unit `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sorted random subset of `0..n` with `k` elements, drawn from stream 0.
pub fn seeded_subset(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, 0));
    idx.truncate(k.min(n));
    idx.sort_unstable();
    idx
}
