//! Corpus block layout and query scratchpad images.
//!
//! Embedding vectors are stored in blocks of 68 vectors. A block is column
//! major: row `j` holds dimension `j` of all 68 vectors back to back, so one
//! 136-byte row feeds every MAC unit of a dot-product unit in a single cycle.
//! Element `(i, j)` of a shard lives at
//! `block(i) * 136 * dim + j * 136 + 2 * (i % 68)`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use half::f16;

use crate::{Error, Result};

/// Vectors per block, one per MAC unit.
pub const BLOCK_VECTORS: usize = 68;
/// binary16 element width.
pub const ELEMENT_BYTES: usize = 2;
/// Bytes in one row of a block (one dimension of 68 vectors).
pub const BLOCK_ROW_BYTES: usize = BLOCK_VECTORS * ELEMENT_BYTES;
/// Capacity of each processing engine's query scratchpad.
pub const QUERY_SCRATCHPAD_BYTES: usize = 2048;
/// Largest vector dimension whose query fits a scratchpad.
pub const MAX_DIM: usize = QUERY_SCRATCHPAD_BYTES / ELEMENT_BYTES;
/// Largest query batch, one query per processing engine.
pub const MAX_BATCH: usize = 64;

/// Bytes occupied by one block of `dim`-dimensional vectors.
pub const fn block_bytes(dim: usize) -> usize {
    BLOCK_ROW_BYTES * dim
}

/// Number of blocks needed for `n_vectors` vectors.
pub const fn blocks_for(n_vectors: usize) -> usize {
    n_vectors.div_ceil(BLOCK_VECTORS)
}

/// Padded byte size of a shard of `n_vectors` vectors.
pub const fn shard_bytes(n_vectors: u64, dim: usize) -> u64 {
    n_vectors.div_ceil(BLOCK_VECTORS as u64) * block_bytes(dim) as u64
}

/// Offset of element `(vector, dimension)` relative to its block start.
pub const fn offset_in_block(vector: usize, dimension: usize) -> usize {
    dimension * BLOCK_ROW_BYTES + ELEMENT_BYTES * (vector % BLOCK_VECTORS)
}

/// Offset of element `(vector, dimension)` relative to the shard start.
pub const fn offset_in_shard(vector: usize, dimension: usize, dim: usize) -> usize {
    (vector / BLOCK_VECTORS) * block_bytes(dim) + offset_in_block(vector, dimension)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::ZeroDimension)
    } else if dim > MAX_DIM {
        Err(Error::QueryTooLarge {
            dim,
            capacity: QUERY_SCRATCHPAD_BYTES,
        })
    } else {
        Ok(())
    }
}

/// A corpus of binary16 embedding vectors stored row major.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    dim: usize,
    data: Vec<f16>,
}

impl Corpus {
    /// Builds a corpus from a flat row-major buffer.
    pub fn new(dim: usize, data: Vec<f16>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_vectors<V: AsRef<[f16]>>(dim: usize, vectors: &[V]) -> Result<Self> {
        check_dim(dim)?;
        let mut data = Vec::with_capacity(vectors.len() * dim);
        for v in vectors {
            let v = v.as_ref();
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            data.extend_from_slice(v);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[f16] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector_mut(&mut self, i: usize) -> &mut [f16] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, f16> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f16] {
        &self.data
    }

    /// Unpadded size of the corpus in bytes.
    pub fn byte_size(&self) -> u64 {
        (self.data.len() * ELEMENT_BYTES) as u64
    }
}

/// A batch of 1..=64 queries sharing one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct QueryBatch {
    dim: usize,
    data: Vec<f16>,
}

impl QueryBatch {
    pub fn new(dim: usize, data: Vec<f16>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        let batch = data.len() / dim;
        if batch == 0 {
            return Err(Error::EmptyBatch);
        }
        if batch > MAX_BATCH {
            return Err(Error::BatchOverflow {
                batch,
                engines: MAX_BATCH,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_vectors<V: AsRef<[f16]>>(dim: usize, queries: &[V]) -> Result<Self> {
        let corpus = Corpus::from_vectors(dim, queries)?;
        Self::new(dim, corpus.data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn query(&self, e: usize) -> &[f16] {
        &self.data[e * self.dim..(e + 1) * self.dim]
    }

    pub fn iter(&self) -> core::slice::ChunksExact<'_, f16> {
        self.data.chunks_exact(self.dim)
    }

    /// Query payload written into the context buffers.
    pub fn payload_bytes(&self) -> u64 {
        (self.data.len() * ELEMENT_BYTES) as u64
    }
}

/// One package's corpus shard in block layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockedShard {
    dim: usize,
    n_vectors: usize,
    base_address: u64,
    bytes: Vec<u8>,
}

impl BlockedShard {
    /// Wraps raw block bytes without checking their length; see
    /// [`BlockedShard::validate`].
    pub fn from_raw_parts(dim: usize, n_vectors: usize, base_address: u64, bytes: Vec<u8>) -> Self {
        Self {
            dim,
            n_vectors,
            base_address,
            bytes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        let expected = blocks_for(self.n_vectors) * block_bytes(self.dim);
        if self.bytes.len() != expected {
            return Err(Error::CorruptedShard {
                expected,
                found: self.bytes.len(),
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vectors(&self) -> usize {
        self.n_vectors
    }

    pub fn base_address(&self) -> u64 {
        self.base_address
    }

    pub fn n_blocks(&self) -> usize {
        blocks_for(self.n_vectors)
    }

    /// Zero-filled vector slots in the final block.
    pub fn pad_count(&self) -> usize {
        self.n_blocks() * BLOCK_VECTORS - self.n_vectors
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn block(&self, b: usize) -> &[u8] {
        let size = block_bytes(self.dim);
        &self.bytes[b * size..(b + 1) * size]
    }

    pub fn blocks(&self) -> core::slice::ChunksExact<'_, u8> {
        self.bytes.chunks_exact(block_bytes(self.dim))
    }

    /// Device address of element `(vector, dimension)`.
    pub fn element_address(&self, vector: usize, dimension: usize) -> u64 {
        self.base_address + offset_in_shard(vector, dimension, self.dim) as u64
    }

    pub fn element(&self, vector: usize, dimension: usize) -> f16 {
        let at = offset_in_shard(vector, dimension, self.dim);
        f16::from_le_bytes([self.bytes[at], self.bytes[at + 1]])
    }

    /// Overwrites one vector in place.
    pub fn write_vector(&mut self, vector: usize, values: &[f16]) -> Result<()> {
        if values.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: values.len(),
            });
        }
        if vector >= self.n_vectors {
            return Err(Error::IdOutOfRange {
                id: vector as u64,
                len: self.n_vectors as u64,
            });
        }
        for (j, v) in values.iter().enumerate() {
            let at = offset_in_shard(vector, j, self.dim);
            self.bytes[at..at + 2].copy_from_slice(&v.to_le_bytes());
        }
        Ok(())
    }
}

/// Packs `vectors` into zero-padded column-major blocks.
pub fn pack_shard<'a, I>(dim: usize, vectors: I, base_address: u64) -> Result<BlockedShard>
where
    I: IntoIterator<Item = &'a [f16]>,
{
    check_dim(dim)?;
    let size = block_bytes(dim);
    let mut bytes = Vec::new();
    let mut n_vectors = 0;
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        let slot = n_vectors % BLOCK_VECTORS;
        if slot == 0 {
            bytes.resize(bytes.len() + size, 0);
        }
        let block_start = bytes.len() - size;
        for (j, x) in v.iter().enumerate() {
            let at = block_start + offset_in_block(slot, j);
            bytes[at..at + 2].copy_from_slice(&x.to_le_bytes());
        }
        n_vectors += 1;
    }
    Ok(BlockedShard {
        dim,
        n_vectors,
        base_address,
        bytes,
    })
}

/// Recovers the packed vectors, padding excluded.
pub fn unpack_shard(shard: &BlockedShard) -> Result<Vec<Vec<f16>>> {
    shard.validate()?;
    Ok((0..shard.n_vectors)
        .map(|i| (0..shard.dim).map(|j| shard.element(i, j)).collect())
        .collect())
}

/// Contiguous range of global vector ids held by one shard.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShardSpan {
    pub start: u64,
    pub len: u64,
}

impl ShardSpan {
    pub fn range(&self) -> Range<u64> {
        self.start..self.start + self.len
    }

    pub fn bytes(&self, dim: usize) -> u64 {
        shard_bytes(self.len, dim)
    }
}

/// Splits `n_vectors` into `units * packages_per_unit` contiguous spans whose
/// sizes differ by at most one vector, checking each padded shard against
/// `package_capacity` bytes.
pub fn plan_shards(
    n_vectors: u64,
    dim: usize,
    units: usize,
    packages_per_unit: usize,
    package_capacity: u64,
) -> Result<Vec<ShardSpan>> {
    check_dim(dim)?;
    if units == 0 {
        return Err(Error::InvalidConfig("units must be at least 1"));
    }
    if packages_per_unit == 0 {
        return Err(Error::InvalidConfig("packages_per_unit must be at least 1"));
    }
    let shards = (units * packages_per_unit) as u64;
    let base = n_vectors / shards;
    let extra = n_vectors % shards;
    let mut start = 0;
    let mut spans = Vec::with_capacity(shards as usize);
    for s in 0..shards {
        let len = base + u64::from(s < extra);
        let required = shard_bytes(len, dim);
        if required > package_capacity {
            return Err(Error::CapacityExceeded {
                required,
                available: package_capacity,
            });
        }
        spans.push(ShardSpan { start, len });
        start += len;
    }
    Ok(spans)
}

/// A corpus split across packages, with the global id offset of each shard.
#[derive(Clone, Debug, PartialEq)]
pub struct ShardedCorpus {
    pub shards: Vec<BlockedShard>,
    pub offsets: Vec<u64>,
}

impl ShardedCorpus {
    pub fn global_id(&self, shard: usize, local: u32) -> u64 {
        self.offsets[shard] + u64::from(local)
    }

    /// Maps a global id back to `(shard, local index)`.
    pub fn locate(&self, global: u64) -> Option<(usize, u32)> {
        let shard = self.offsets.partition_point(|&o| o <= global).checked_sub(1)?;
        let local = global - self.offsets[shard];
        if local < self.shards[shard].n_vectors as u64 {
            Some((shard, local as u32))
        } else {
            // empty shards share an offset with their successor
            self.shards
                .iter()
                .zip(&self.offsets)
                .enumerate()
                .find(|(_, (s, &o))| global >= o && global < o + s.n_vectors as u64)
                .map(|(i, (_, &o))| (i, (global - o) as u32))
        }
    }
}

/// Partitions `corpus` into `units * packages_per_unit` packed shards, all
/// starting at `base_address` in their package.
pub fn shard_corpus(
    corpus: &Corpus,
    units: usize,
    packages_per_unit: usize,
    package_capacity: u64,
    base_address: u64,
) -> Result<ShardedCorpus> {
    let spans = plan_shards(
        corpus.len() as u64,
        corpus.dim(),
        units,
        packages_per_unit,
        package_capacity,
    )?;
    let mut shards = Vec::with_capacity(spans.len());
    let mut offsets = Vec::with_capacity(spans.len());
    for span in &spans {
        let range = span.start as usize..(span.start + span.len) as usize;
        let shard = pack_shard(corpus.dim(), range.map(|i| corpus.vector(i)), base_address)?;
        shards.push(shard);
        offsets.push(span.start);
    }
    Ok(ShardedCorpus { shards, offsets })
}

/// Contents of one processing engine's query scratchpad.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScratchpadImage {
    /// Query bytes stored sequentially from the scratchpad base.
    Active(Vec<u8>),
    Inactive,
}

impl ScratchpadImage {
    pub fn is_active(&self) -> bool {
        matches!(self, ScratchpadImage::Active(_))
    }
}

/// Lays query `e` into engine `e`'s scratchpad; engines past the batch stay
/// inactive.
pub fn layout_query_scratchpad(batch: &QueryBatch, engines: usize) -> Result<Vec<ScratchpadImage>> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if batch.len() > engines {
        return Err(Error::BatchOverflow {
            batch: batch.len(),
            engines,
        });
    }
    let needed = batch.dim() * ELEMENT_BYTES;
    if needed > QUERY_SCRATCHPAD_BYTES {
        return Err(Error::QueryTooLarge {
            dim: batch.dim(),
            capacity: QUERY_SCRATCHPAD_BYTES,
        });
    }
    let mut images = Vec::with_capacity(engines);
    for q in batch.iter() {
        let mut image = vec![0u8; QUERY_SCRATCHPAD_BYTES];
        for (j, x) in q.iter().enumerate() {
            image[2 * j..2 * j + 2].copy_from_slice(&x.to_le_bytes());
        }
        images.push(ScratchpadImage::Active(image));
    }
    images.resize(engines, ScratchpadImage::Inactive);
    Ok(images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(x: f32) -> f16 {
        f16::from_f32(x)
    }

    fn ramp(n: usize, dim: usize) -> Vec<Vec<f16>> {
        (0..n)
            .map(|i| (0..dim).map(|j| h((i * dim + j) as f32 * 0.25 - 7.0)).collect())
            .collect()
    }

    #[test]
    fn one_full_block_of_768() {
        let vs = ramp(68, 768);
        let shard = pack_shard(768, vs.iter().map(Vec::as_slice), 0).unwrap();
        assert_eq!(shard.n_blocks(), 1);
        assert_eq!(shard.as_bytes().len(), 104_448);
        assert_eq!(shard.pad_count(), 0);
    }

    #[test]
    fn empty_corpus_packs_to_no_blocks() {
        let shard = pack_shard(16, core::iter::empty(), 0).unwrap();
        assert_eq!(shard.n_blocks(), 0);
        assert_eq!(shard.n_vectors(), 0);
        assert!(unpack_shard(&shard).unwrap().is_empty());
    }

    #[test]
    fn seventy_vectors_pad_the_second_block() {
        let vs = ramp(70, 4);
        let shard = pack_shard(4, vs.iter().map(Vec::as_slice), 0).unwrap();
        assert_eq!(shard.n_blocks(), 2);
        assert_eq!(shard.pad_count(), 66);
        assert_eq!(unpack_shard(&shard).unwrap(), vs);
        // padded slots are zero
        for slot in 2..68 {
            for j in 0..4 {
                assert_eq!(shard.element(68 + slot, j).to_bits(), 0);
            }
        }
    }

    #[test]
    fn single_vector_offsets() {
        let shard = pack_shard(2, [&[h(1.0), h(2.0)][..]], 0).unwrap();
        let bytes = shard.as_bytes();
        assert_eq!(bytes.len(), 272);
        assert_eq!(&bytes[0..2], &h(1.0).to_le_bytes());
        assert_eq!(&bytes[136..138], &h(2.0).to_le_bytes());
        assert_eq!(shard.pad_count(), 67);
        assert_eq!(unpack_shard(&shard).unwrap(), vec![vec![h(1.0), h(2.0)]]);
    }

    #[test]
    fn pack_rejects_mismatch_and_oversize() {
        let a = [h(1.0); 3];
        let b = [h(1.0); 4];
        assert_eq!(
            pack_shard(3, [&a[..], &b[..]], 0),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 4
            })
        );
        let big = vec![h(0.0); 1025];
        assert!(matches!(
            pack_shard(1025, [&big[..]], 0),
            Err(Error::QueryTooLarge { dim: 1025, .. })
        ));
    }

    #[test]
    fn unpack_detects_truncated_blocks() {
        let vs = ramp(3, 8);
        let shard = pack_shard(8, vs.iter().map(Vec::as_slice), 0).unwrap();
        let mut bytes = shard.into_bytes();
        bytes.pop();
        let bad = BlockedShard::from_raw_parts(8, 3, 0, bytes);
        assert_eq!(
            unpack_shard(&bad),
            Err(Error::CorruptedShard {
                expected: 1088,
                found: 1087
            })
        );
    }

    #[test]
    fn element_address_includes_base() {
        let vs = ramp(100, 3);
        let shard = pack_shard(3, vs.iter().map(Vec::as_slice), 4096).unwrap();
        // vector 70 is slot 2 of block 1
        assert_eq!(shard.element_address(70, 2), 4096 + 408 + 2 * 136 + 4);
    }

    #[test]
    fn shard_sizes_for_512_gb() {
        // VD = 1024, 2 KiB per vector
        let n = 512 * crate::GB / 2048;
        let spans = plan_shards(n, 1024, 1, 8, 64 * crate::GIB).unwrap();
        assert_eq!(spans.len(), 8);
        for s in &spans {
            assert_eq!(s.len * 2048, 64 * crate::GB);
            assert!(s.bytes(1024) <= 64 * crate::GIB);
        }
    }

    #[test]
    fn shard_sizes_even_split() {
        let spans = plan_shards(8, 4, 1, 8, u64::MAX).unwrap();
        assert!(spans.iter().all(|s| s.len == 1));
        let spans = plan_shards(9, 4, 1, 8, u64::MAX).unwrap();
        let sizes: Vec<u64> = spans.iter().map(|s| s.len).collect();
        assert_eq!(sizes, vec![2, 1, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn nine_vectors_reassemble() {
        let vs = ramp(9, 4);
        let corpus = Corpus::from_vectors(4, &vs).unwrap();
        let sharded = shard_corpus(&corpus, 1, 8, u64::MAX, 0).unwrap();
        let mut seen = [0u32; 9];
        for (s, shard) in sharded.shards.iter().enumerate() {
            for local in 0..shard.n_vectors() as u32 {
                let g = sharded.global_id(s, local);
                seen[g as usize] += 1;
                assert_eq!(sharded.locate(g), Some((s, local)));
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn locate_skips_empty_shards() {
        let vs = ramp(3, 2);
        let corpus = Corpus::from_vectors(2, &vs).unwrap();
        let sharded = shard_corpus(&corpus, 1, 8, u64::MAX, 0).unwrap();
        assert_eq!(sharded.locate(2), Some((2, 0)));
        assert_eq!(sharded.locate(3), None);
    }

    #[test]
    fn shard_capacity_is_enforced() {
        // 69 vectors of dim 1 need two blocks = 272 bytes
        let err = plan_shards(69, 1, 1, 1, 271).unwrap_err();
        assert_eq!(
            err,
            Error::CapacityExceeded {
                required: 272,
                available: 271
            }
        );
        assert!(plan_shards(10, 1, 0, 8, u64::MAX).is_err());
    }

    #[test]
    fn scratchpad_images() {
        let q = QueryBatch::from_vectors(3, &[[h(1.0), h(-2.0), h(0.5)]]).unwrap();
        let images = layout_query_scratchpad(&q, 64).unwrap();
        assert_eq!(images.len(), 64);
        assert_eq!(images.iter().filter(|i| i.is_active()).count(), 1);
        match &images[0] {
            ScratchpadImage::Active(bytes) => {
                assert_eq!(bytes.len(), QUERY_SCRATCHPAD_BYTES);
                assert_eq!(&bytes[2..4], &h(-2.0).to_le_bytes());
            }
            ScratchpadImage::Inactive => panic!("engine 0 inactive"),
        }

        let full = QueryBatch::new(8, vec![h(1.0); 8 * 64]).unwrap();
        let images = layout_query_scratchpad(&full, 64).unwrap();
        assert!(images.iter().all(ScratchpadImage::is_active));
        assert_eq!(
            layout_query_scratchpad(&full, 32),
            Err(Error::BatchOverflow {
                batch: 64,
                engines: 32
            })
        );
    }

    #[test]
    fn query_batch_bounds() {
        assert_eq!(QueryBatch::new(4, vec![]), Err(Error::EmptyBatch));
        assert!(matches!(
            QueryBatch::new(1, vec![h(0.0); 65]),
            Err(Error::BatchOverflow { batch: 65, .. })
        ));
        assert!(QueryBatch::new(1024, vec![h(0.0); 1024]).is_ok());
        assert!(QueryBatch::new(1025, vec![h(0.0); 1025]).is_err());
    }

    fn arb_corpus() -> impl Strategy<Value = (usize, Vec<u16>)> {
        (1usize..=48, 0usize..300).prop_flat_map(|(dim, n)| {
            (Just(dim), proptest::collection::vec(any::<u16>(), dim * n))
        })
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact((dim, raw) in arb_corpus()) {
            let data: Vec<f16> = raw.iter().map(|&b| f16::from_bits(b)).collect();
            let shard = pack_shard(dim, data.chunks_exact(dim), 0).unwrap();
            prop_assert_eq!(shard.as_bytes().len() % block_bytes(dim), 0);
            let back = unpack_shard(&shard).unwrap();
            let flat: Vec<u16> = back.iter().flatten().map(|x| x.to_bits()).collect();
            prop_assert_eq!(flat, raw);
        }

        #[test]
        fn offset_formula_addresses_element(
            (dim, raw) in arb_corpus(),
            pick in any::<(usize, usize)>(),
        ) {
            let n = raw.len() / dim;
            prop_assume!(n > 0);
            let (i, j) = (pick.0 % n, pick.1 % dim);
            let data: Vec<f16> = raw.iter().map(|&b| f16::from_bits(b)).collect();
            let shard = pack_shard(dim, data.chunks_exact(dim), 0).unwrap();
            let block = shard.block(i / BLOCK_VECTORS);
            let at = j * 136 + 2 * (i % 68);
            prop_assert_eq!(u16::from_le_bytes([block[at], block[at + 1]]), raw[i * dim + j]);
        }

        #[test]
        fn sharding_partitions_the_corpus(
            n in 0usize..500,
            units in 1usize..5,
            packages in 1usize..9,
        ) {
            let vs = ramp(n, 2);
            let corpus = Corpus::from_vectors(2, &vs).unwrap();
            let sharded = shard_corpus(&corpus, units, packages, u64::MAX, 0).unwrap();
            prop_assert_eq!(sharded.shards.len(), units * packages);
            let mut joined = Vec::new();
            for s in &sharded.shards {
                joined.extend(unpack_shard(s).unwrap());
            }
            prop_assert_eq!(joined, vs);
            let sizes: Vec<usize> = sharded.shards.iter().map(BlockedShard::n_vectors).collect();
            let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
            prop_assert!(spread <= BLOCK_VECTORS);
        }
    }
}
