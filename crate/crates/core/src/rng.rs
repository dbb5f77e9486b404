//! Reproducible uniform streams.
//!
//! Samples are produced by ChaCha8 with the user seed as key and the batch
//! index as stream id, so sample `i` is a pure function of `(seed, i)` and does
//! not depend on how work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::par;

pub const DEFAULT_SEED: u64 = 0x5eed_c1c1_e000_0001;
const BATCH: usize = 1024;

/// Generator for one logical stream (e.g. one randomly drawn family).
pub fn stream(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// `count` uniform samples in `[lo, hi)`.
pub fn uniform_samples(seed: u64, count: usize, lo: f64, hi: f64) -> Vec<f64> {
    let batches = count.div_ceil(BATCH);
    let chunks = par::map_range(batches, |b| {
        // streams above 2^32 are reserved for sample batches
        let mut rng = stream(seed, (1u64 << 32) + b as u64);
        let len = BATCH.min(count - b * BATCH);
        (0..len)
            .map(|_| lo + (hi - lo) * rng.random::<f64>())
            .collect::<Vec<_>>()
    });
    chunks.into_iter().flatten().collect()
}
