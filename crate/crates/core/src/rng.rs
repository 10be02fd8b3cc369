//! Deterministic random substreams.
//!
//! Every Monte Carlo run is split into fixed-size chunks; chunk `c` of a run
//! with seed `seed` draws from ChaCha8 keyed by `seed` on stream `c`. Results
//! depend only on the seed and sample count, never on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

/// Samples per chunk.
pub const CHUNK: u64 = 4096;

pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `(chunk index, first sample, sample count)` covering `0..samples`.
pub fn chunks(samples: u64) -> Vec<(u64, u64, u64)> {
    (0..samples.div_ceil(CHUNK))
        .map(|c| {
            let start = c * CHUNK;
            (c, start, CHUNK.min(samples - start))
        })
        .collect()
}

/// Runs `work(rng, count)` on every chunk in parallel and returns the results
/// in chunk order.
pub fn map_chunks<T, F>(seed: u64, samples: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, u64) -> T + Sync,
{
    chunks(samples)
        .into_par_iter()
        .map(|(c, _, count)| {
            let mut rng = substream(seed, c);
            work(&mut rng, count)
        })
        .collect()
}
