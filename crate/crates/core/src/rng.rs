//! Seeded, splittable randomness.
//!
//! Work is cut into fixed-size chunks. Chunk `k` of a run with seed `s` draws
//! from ChaCha8 keyed by `s` on stream `k`, so every chunk owns an
//! independent counter-based sequence and results do not depend on how
//! chunks are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type SeededRng = ChaCha8Rng;

/// Items per chunk for chunked parallel work.
pub const CHUNK_SIZE: usize = 1 << 14;

/// Generator for `chunk` of the run keyed by `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// A contiguous slice of work items handled by one generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chunk {
    pub index: u64,
    pub start: usize,
    pub len: usize,
}

pub fn chunks(n: usize) -> impl Iterator<Item = Chunk> {
    (0..n.div_ceil(CHUNK_SIZE)).map(move |k| {
        let start = k * CHUNK_SIZE;
        Chunk {
            index: k as u64,
            start,
            len: CHUNK_SIZE.min(n - start),
        }
    })
}

/// Runs `work` on every chunk of `n` items in parallel and returns the
/// per-chunk results in chunk order.
pub fn par_chunks<T, F>(n: usize, seed: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(Chunk, &mut SeededRng) -> T + Sync,
{
    let all: Vec<Chunk> = chunks(n).collect();
    all.into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, chunk.index);
            work(chunk, &mut rng)
        })
        .collect()
}

/// Runs `f` on a dedicated pool with `threads` workers, or on the global
/// pool when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("thread count must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
