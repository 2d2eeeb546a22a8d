//! Near-memory accelerator: 64 processing engines sharing one DRAM stream.
//!
//! Each engine holds one query in its scratchpad. Blocks of 68 embedding
//! vectors are streamed from the package once and broadcast to every active
//! engine; an engine's 68 MAC units each accumulate one vector's score over
//! `dim` cycles, then the 68 scores drain into the engine's Top-K unit while
//! the next block is evaluated.

mod topk;

pub use topk::{rank, topk_insert, PartialTopK, ScoreEntry};

use alloc::vec;
use alloc::vec::Vec;

use half::f16;

use crate::layout::{
    block_bytes, blocks_for, layout_query_scratchpad, BlockedShard, QueryBatch, ScratchpadImage,
    BLOCK_ROW_BYTES, BLOCK_VECTORS,
};
use crate::{Error, Nanos, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct NmaConfig {
    pub engines: usize,
    pub macs_per_engine: usize,
    pub clock_hz: f64,
    /// Entries kept by each Top-K unit.
    pub hw_k: usize,
    /// DRAM read width per cycle.
    pub bytes_per_cycle: usize,
    pub query_scratchpad_bytes: usize,
}

impl Default for NmaConfig {
    fn default() -> Self {
        Self {
            engines: 64,
            macs_per_engine: 68,
            clock_hz: 1e9,
            hw_k: 32,
            bytes_per_cycle: 136,
            query_scratchpad_bytes: 2048,
        }
    }
}

impl NmaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.engines == 0 {
            return Err(Error::InvalidConfig("engines must be at least 1"));
        }
        if self.macs_per_engine == 0 {
            return Err(Error::InvalidConfig("macs_per_engine must be at least 1"));
        }
        if self.macs_per_engine * 2 != self.bytes_per_cycle {
            return Err(Error::InvalidConfig(
                "bytes_per_cycle must equal two bytes per MAC",
            ));
        }
        if self.hw_k == 0 {
            return Err(Error::InvalidConfig("hw_k must be at least 1"));
        }
        if !(self.clock_hz > 0.0) {
            return Err(Error::InvalidConfig("clock_hz must be positive"));
        }
        Ok(())
    }

    /// Sustained DRAM stream rate in bytes per second.
    pub fn stream_bandwidth(&self) -> f64 {
        self.bytes_per_cycle as f64 * self.clock_hz
    }
}

/// Control-unit cycles to scan `n_vectors` vectors of dimension `dim`.
///
/// Each block takes `dim` cycles in the dot-product stage and 68 cycles to
/// drain its scores; the two stages overlap, so a block costs
/// `max(dim, 68)` and only the last drain is exposed.
pub fn nma_cycles(n_vectors: u64, dim: usize, cfg: &NmaConfig) -> u64 {
    if n_vectors == 0 {
        return 0;
    }
    let lanes = cfg.macs_per_engine as u64;
    let blocks = n_vectors.div_ceil(lanes);
    blocks * (dim as u64).max(lanes) + lanes
}

pub fn nma_time(n_vectors: u64, dim: usize, cfg: &NmaConfig) -> Nanos {
    Nanos(nma_cycles(n_vectors, dim, cfg) as f64 / cfg.clock_hz * 1e9)
}

fn decode_block(block: &[u8], out: &mut [f32]) {
    for (x, b) in out.iter_mut().zip(block.chunks_exact(2)) {
        *x = f16::from_le_bytes([b[0], b[1]]).to_f32();
    }
}

// Per-lane binary32 accumulation in ascending dimension order. The product of
// two binary16 values is exact in binary32, so only the adds round.
fn mac_block(query: &[f32], decoded: &[f32], acc: &mut [f32; BLOCK_VECTORS]) {
    *acc = [0.0; BLOCK_VECTORS];
    for (q, row) in query.iter().zip(decoded.chunks_exact(BLOCK_VECTORS)) {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += q * v;
        }
    }
}

/// Scores of one query against the 68 vectors of a block, rounded to
/// binary16 (round to nearest even).
pub fn dot_product_block(query: &[f16], block: &[u8]) -> Result<[f16; BLOCK_VECTORS]> {
    let dim = query.len();
    if block.len() != block_bytes(dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: block.len() / BLOCK_ROW_BYTES,
        });
    }
    let q: Vec<f32> = query.iter().map(|x| x.to_f32()).collect();
    let mut decoded = vec![0.0f32; dim * BLOCK_VECTORS];
    decode_block(block, &mut decoded);
    let mut acc = [0.0f32; BLOCK_VECTORS];
    mac_block(&q, &decoded, &mut acc);
    Ok(acc.map(f16::from_f32))
}

/// Output of one offload on one package.
#[derive(Clone, Debug, PartialEq)]
pub struct NmaOffloadResult {
    /// Partial lists for engines `0..batch`.
    pub partials: Vec<PartialTopK>,
    pub cycles: u64,
    pub dram_bytes_read: u64,
}

impl NmaOffloadResult {
    pub fn time(&self, cfg: &NmaConfig) -> Nanos {
        Nanos(self.cycles as f64 / cfg.clock_hz * 1e9)
    }
}

/// Runs every active engine over the whole shard.
pub fn run_nma_offload(
    shard: &BlockedShard,
    batch: &QueryBatch,
    cfg: &NmaConfig,
) -> Result<NmaOffloadResult> {
    cfg.validate()?;
    if cfg.macs_per_engine != BLOCK_VECTORS {
        return Err(Error::InvalidConfig(
            "functional runs need one MAC per block column",
        ));
    }
    shard.validate()?;
    let dim = shard.dim();
    if batch.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: batch.dim(),
        });
    }
    if 2 * dim > cfg.query_scratchpad_bytes {
        return Err(Error::QueryTooLarge {
            dim,
            capacity: cfg.query_scratchpad_bytes,
        });
    }
    let queries: Vec<Vec<f32>> = layout_query_scratchpad(batch, cfg.engines)?
        .iter()
        .filter_map(|image| match image {
            ScratchpadImage::Active(bytes) => Some(
                bytes[..2 * dim]
                    .chunks_exact(2)
                    .map(|b| f16::from_le_bytes([b[0], b[1]]).to_f32())
                    .collect(),
            ),
            ScratchpadImage::Inactive => None,
        })
        .collect();

    let mut partials = vec![PartialTopK::new(cfg.hw_k); queries.len()];
    let mut decoded = vec![0.0f32; dim * BLOCK_VECTORS];
    let mut acc = [0.0f32; BLOCK_VECTORS];
    let n = shard.n_vectors();
    for (b, block) in shard.blocks().enumerate() {
        decode_block(block, &mut decoded);
        let first = b * BLOCK_VECTORS;
        // pad lanes are scored but never reach the Top-K unit
        let live = (n - first).min(BLOCK_VECTORS);
        for (query, list) in queries.iter().zip(partials.iter_mut()) {
            mac_block(query, &decoded, &mut acc);
            for (lane, score) in acc[..live].iter().enumerate() {
                list.insert(ScoreEntry::new(f16::from_f32(*score), (first + lane) as u32));
            }
        }
    }

    Ok(NmaOffloadResult {
        partials,
        cycles: nma_cycles(n as u64, dim, cfg),
        dram_bytes_read: (blocks_for(n) * block_bytes(dim)) as u64,
    })
}
