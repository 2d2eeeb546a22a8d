//! Seeded synthetic corpora and query batches.

use iks_core::f16;
use iks_core::layout::{Corpus, QueryBatch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn values(rng: &mut ChaCha8Rng, count: usize) -> Vec<f16> {
    (0..count)
        .map(|_| f16::from_f32(rng.gen_range(-1.0f32..1.0)))
        .collect()
}

/// `n` vectors with elements uniform in [-1, 1).
pub fn corpus(n: usize, dim: usize, seed: u64) -> iks_core::Result<Corpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Corpus::new(dim, values(&mut rng, n * dim))
}

/// Queries drawn from a stream independent of the corpus stream.
pub fn queries(batch: usize, dim: usize, seed: u64) -> iks_core::Result<QueryBatch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    QueryBatch::new(dim, values(&mut rng, batch * dim))
}
