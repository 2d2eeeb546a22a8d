//! Shard fixture files.
//!
//! Little endian. A 24-byte header
//!
//! | offset | size | field          |
//! |--------|------|----------------|
//! | 0      | 4    | magic `IKS1`   |
//! | 4      | 4    | VD (u32)       |
//! | 8      | 8    | N (u64)        |
//! | 16     | 8    | base address   |
//!
//! is followed by the raw block bytes, `ceil(N / 68) * 136 * VD` of them.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use iks_core::layout::{block_bytes, blocks_for, BlockedShard};

use crate::{SimError, SimResult};

pub const MAGIC: [u8; 4] = *b"IKS1";
pub const HEADER_BYTES: usize = 24;

pub fn encode(shard: &BlockedShard) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_BYTES + shard.as_bytes().len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(shard.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(shard.n_vectors() as u64).to_le_bytes());
    out.extend_from_slice(&shard.base_address().to_le_bytes());
    out.extend_from_slice(shard.as_bytes());
    out
}

/// Parses a shard image; `path` only labels errors.
pub fn decode(bytes: &[u8], path: &Path) -> SimResult<BlockedShard> {
    let bad = |reason: String| SimError::ShardFormat {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_BYTES {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if bytes[..4] != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let base = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let n = usize::try_from(n).map_err(|_| bad(format!("vector count {n} too large")))?;
    let body = &bytes[HEADER_BYTES..];
    let expected = blocks_for(n)
        .checked_mul(block_bytes(dim))
        .ok_or_else(|| bad("block size overflows".into()))?;
    if body.len() != expected {
        return Err(bad(format!(
            "expected {expected} block bytes, found {}",
            body.len()
        )));
    }
    let shard = BlockedShard::from_raw_parts(dim, n, base, body.to_vec());
    shard.validate()?;
    Ok(shard)
}

pub fn write(path: &Path, shard: &BlockedShard) -> SimResult<()> {
    let mut f = fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    f.write_all(&encode(shard)).map_err(|e| SimError::io(path, e))
}

pub fn read(path: &Path) -> SimResult<BlockedShard> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| SimError::io(path, e))?;
    decode(&bytes, path)
}
