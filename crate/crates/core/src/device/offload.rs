use alloc::vec::Vec;

use super::{DeviceConfig, Doorbell, DoorbellState, ProtocolEvent};
use crate::layout::{BlockedShard, QueryBatch, ELEMENT_BYTES};
use crate::nma::{nma_time, run_nma_offload, NmaConfig, NmaOffloadResult};
use crate::{Error, Nanos, Result};

/// Fixed descriptor header: vector dimension and batch size.
const DESCRIPTOR_HEADER_BYTES: u64 = 8;
/// Per package: base address and vector count.
const PACKAGE_DESCRIPTOR_BYTES: u64 = 16;
/// Descriptor page appended to the query buffers of the context window.
const DESCRIPTOR_PAGE_BYTES: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PackageDescriptor {
    pub base_address: u64,
    pub n_vectors: u64,
}

/// What the host writes to the context buffers before ringing the doorbell.
#[derive(Clone, Debug, PartialEq)]
pub struct OffloadContext {
    pub batch: QueryBatch,
    pub packages: Vec<PackageDescriptor>,
}

impl OffloadContext {
    /// Describes `shards` for a search with `batch`.
    pub fn for_shards(batch: QueryBatch, shards: &[BlockedShard]) -> Self {
        let packages = shards
            .iter()
            .map(|s| PackageDescriptor {
                base_address: s.base_address(),
                n_vectors: s.n_vectors() as u64,
            })
            .collect();
        Self { batch, packages }
    }

    pub fn dim(&self) -> usize {
        self.batch.dim()
    }

    pub fn descriptor_bytes(&self) -> u64 {
        DESCRIPTOR_HEADER_BYTES + PACKAGE_DESCRIPTOR_BYTES * self.packages.len() as u64
    }

    pub fn byte_size(&self) -> u64 {
        self.batch.payload_bytes() + self.descriptor_bytes()
    }

    /// Size of the shared context-buffer window.
    pub fn window_bytes(cfg: &NmaConfig) -> u64 {
        (cfg.engines * cfg.query_scratchpad_bytes) as u64 + DESCRIPTOR_PAGE_BYTES
    }

    pub fn validate(&self, shards: &[BlockedShard], cfg: &DeviceConfig) -> Result<()> {
        if self.byte_size() > Self::window_bytes(&cfg.nma) {
            return Err(Error::CapacityExceeded {
                required: self.byte_size(),
                available: Self::window_bytes(&cfg.nma),
            });
        }
        if shards.len() != cfg.packages_per_unit || self.packages.len() != shards.len() {
            return Err(Error::ContextMismatch {
                package: self.packages.len().min(shards.len()),
            });
        }
        for (p, (desc, shard)) in self.packages.iter().zip(shards).enumerate() {
            if shard.dim() != self.dim() && shard.n_vectors() > 0 {
                return Err(Error::DimensionMismatch {
                    expected: shard.dim(),
                    found: self.dim(),
                });
            }
            if desc.n_vectors != shard.n_vectors() as u64 || desc.base_address != shard.base_address()
            {
                return Err(Error::ContextMismatch { package: p });
            }
        }
        Ok(())
    }

    /// Query bytes per context buffer.
    pub fn query_bytes(&self) -> u64 {
        (self.batch.len() * self.dim() * ELEMENT_BYTES) as u64
    }
}

/// Runs the NMAs of one unit. Implementations may execute packages in
/// parallel but must return results in package order.
pub trait PackageRunner {
    fn run(
        &self,
        shards: &[BlockedShard],
        batch: &QueryBatch,
        cfg: &NmaConfig,
    ) -> Result<Vec<NmaOffloadResult>>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SequentialRunner;

impl PackageRunner for SequentialRunner {
    fn run(
        &self,
        shards: &[BlockedShard],
        batch: &QueryBatch,
        cfg: &NmaConfig,
    ) -> Result<Vec<NmaOffloadResult>> {
        shards.iter().map(|s| run_nma_offload(s, batch, cfg)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OffloadOutcome {
    pub per_package: Vec<NmaOffloadResult>,
    /// Slowest package; packages run concurrently.
    pub dot_product: Nanos,
}

/// Runs the search on every package of one unit.
pub fn execute_offload<R: PackageRunner + ?Sized>(
    shards: &[BlockedShard],
    ctx: &OffloadContext,
    cfg: &DeviceConfig,
    runner: &R,
) -> Result<OffloadOutcome> {
    ctx.validate(shards, cfg)?;
    let per_package = runner.run(shards, &ctx.batch, &cfg.nma)?;
    let dot_product = shards
        .iter()
        .map(|s| nma_time(s.n_vectors() as u64, ctx.dim(), &cfg.nma))
        .fold(Nanos::ZERO, Nanos::max);
    Ok(OffloadOutcome {
        per_package,
        dot_product,
    })
}

/// Device-side state of one unit: resident shards, doorbell and the
/// context and output buffers.
#[derive(Clone, Debug)]
pub struct IksUnit {
    shards: Vec<BlockedShard>,
    doorbell: Doorbell,
    context: Option<OffloadContext>,
    output: Option<OffloadOutcome>,
}

impl IksUnit {
    pub fn new(shards: Vec<BlockedShard>, cfg: &DeviceConfig) -> Result<Self> {
        if shards.len() != cfg.packages_per_unit {
            return Err(Error::ContextMismatch {
                package: shards.len().min(cfg.packages_per_unit),
            });
        }
        for s in &shards {
            s.validate()?;
        }
        Ok(Self {
            shards,
            doorbell: Doorbell::new(),
            context: None,
            output: None,
        })
    }

    pub fn shards(&self) -> &[BlockedShard] {
        &self.shards
    }

    pub fn shard_mut(&mut self, package: usize) -> &mut BlockedShard {
        &mut self.shards[package]
    }

    pub fn state(&self) -> DoorbellState {
        self.doorbell.state()
    }

    pub fn write_context(&mut self, ctx: OffloadContext) -> Result<DoorbellState> {
        let state = self.doorbell.fire(ProtocolEvent::WriteContext)?;
        self.context = Some(ctx);
        Ok(state)
    }

    pub fn ring(&mut self) -> Result<DoorbellState> {
        self.doorbell.fire(ProtocolEvent::RingDoorbell)
    }

    /// Device observes the doorbell, runs all NMAs and fills the output
    /// scratchpads.
    pub fn execute<R: PackageRunner + ?Sized>(
        &mut self,
        cfg: &DeviceConfig,
        runner: &R,
    ) -> Result<OffloadOutcome> {
        if self.state() != DoorbellState::DoorbellRung {
            return Err(Error::Protocol {
                state: self.state(),
                event: ProtocolEvent::DeviceObserve,
            });
        }
        let ctx = self.context.as_ref().ok_or(Error::PlacementMissing)?;
        let outcome = execute_offload(&self.shards, ctx, cfg, runner)?;
        self.doorbell.fire(ProtocolEvent::DeviceObserve)?;
        self.doorbell.fire(ProtocolEvent::WriteResults)?;
        self.output = Some(outcome.clone());
        Ok(outcome)
    }

    pub fn notify(&mut self) -> Result<DoorbellState> {
        self.doorbell.fire(ProtocolEvent::NotifyHost)
    }

    /// Host takes the partial lists; the unit returns to idle.
    pub fn consume(&mut self) -> Result<Vec<NmaOffloadResult>> {
        self.doorbell.fire(ProtocolEvent::ConsumeResults)?;
        self.context = None;
        Ok(self.output.take().map(|o| o.per_package).unwrap_or_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{pack_shard, shard_corpus, Corpus};
    use half::f16;

    fn corpus(n: usize, dim: usize) -> Corpus {
        let data = (0..n * dim)
            .map(|i| f16::from_f32(((i * 37 % 101) as f32 - 50.0) / 64.0))
            .collect();
        Corpus::new(dim, data).unwrap()
    }

    fn batch(dim: usize, b: usize) -> QueryBatch {
        let data = (0..dim * b)
            .map(|i| f16::from_f32(((i * 13 % 29) as f32 - 14.0) / 16.0))
            .collect();
        QueryBatch::new(dim, data).unwrap()
    }

    #[test]
    fn empty_package_contributes_empty_lists() {
        let cfg = DeviceConfig::default();
        let sharded = shard_corpus(&corpus(7, 8), 1, 8, u64::MAX, 0).unwrap();
        let ctx = OffloadContext::for_shards(batch(8, 2), &sharded.shards);
        let out = execute_offload(&sharded.shards, &ctx, &cfg, &SequentialRunner).unwrap();
        assert_eq!(out.per_package.len(), 8);
        assert!(out.per_package[7].partials.iter().all(|p| p.is_empty()));
        assert_eq!(out.dot_product, nma_time(1, 8, &cfg.nma));
    }

    #[test]
    fn phase_time_is_max_not_sum() {
        let cfg = DeviceConfig::default();
        let c = corpus(1000, 16);
        let mut shards: Vec<BlockedShard> = (0..8)
            .map(|p| pack_shard(16, (0..10 * (p + 1)).map(|i| c.vector(i)), 0).unwrap())
            .collect();
        shards[3] = pack_shard(16, (0..900).map(|i| c.vector(i)), 0).unwrap();
        let ctx = OffloadContext::for_shards(batch(16, 1), &shards);
        let out = execute_offload(&shards, &ctx, &cfg, &SequentialRunner).unwrap();
        assert_eq!(out.dot_product, nma_time(900, 16, &cfg.nma));
    }

    #[test]
    fn mismatched_context_is_rejected() {
        let cfg = DeviceConfig::default();
        let sharded = shard_corpus(&corpus(80, 8), 1, 8, u64::MAX, 0).unwrap();
        let mut ctx = OffloadContext::for_shards(batch(8, 1), &sharded.shards);
        ctx.packages[5].n_vectors += 1;
        assert_eq!(
            execute_offload(&sharded.shards, &ctx, &cfg, &SequentialRunner),
            Err(Error::ContextMismatch { package: 5 })
        );
        ctx.packages.pop();
        assert!(execute_offload(&sharded.shards, &ctx, &cfg, &SequentialRunner).is_err());
        let mut ctx = OffloadContext::for_shards(batch(8, 1), &sharded.shards);
        ctx.packages[0].base_address = 64;
        assert_eq!(
            execute_offload(&sharded.shards, &ctx, &cfg, &SequentialRunner),
            Err(Error::ContextMismatch { package: 0 })
        );
    }

    #[test]
    fn context_size_and_window() {
        let cfg = DeviceConfig::default();
        let sharded = shard_corpus(&corpus(80, 1024), 1, 8, u64::MAX, 0).unwrap();
        let ctx = OffloadContext::for_shards(batch(1024, 64), &sharded.shards);
        assert_eq!(ctx.byte_size(), 64 * 2048 + 8 + 8 * 16);
        assert!(ctx.validate(&sharded.shards, &cfg).is_ok());
    }

    #[test]
    fn unit_walks_the_protocol() {
        let cfg = DeviceConfig::default();
        let sharded = shard_corpus(&corpus(100, 8), 1, 8, u64::MAX, 0).unwrap();
        let mut unit = IksUnit::new(sharded.shards.clone(), &cfg).unwrap();
        // executing before the doorbell is a violation
        assert!(matches!(
            unit.execute(&cfg, &SequentialRunner),
            Err(Error::Protocol { .. })
        ));
        unit.write_context(OffloadContext::for_shards(batch(8, 3), unit.shards()))
            .unwrap();
        assert!(unit.execute(&cfg, &SequentialRunner).is_err());
        unit.ring().unwrap();
        unit.execute(&cfg, &SequentialRunner).unwrap();
        assert_eq!(unit.state(), DoorbellState::ResultsWritten);
        assert!(unit.consume().is_err());
        unit.notify().unwrap();
        let results = unit.consume().unwrap();
        assert_eq!(results.len(), 8);
        assert_eq!(unit.state(), DoorbellState::Idle);
    }
}
