//! Host runtime: the blocking search call, software-managed coherence of the
//! corpus, and the final top-K reduction across NMAs and units.

mod aggregate;

pub use aggregate::{aggregate_topk, AggregatedList, GlobalEntry, ShardPartial};

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use half::f16;

use crate::analysis::{CalibratedAggregation, LatencyBreakdown};
use crate::device::{
    Actor, DeviceConfig, DoorbellState, EventTrace, IksUnit, OffloadContext, PackageRunner,
    ProtocolEvent, TraceEvent, TraceRecord,
};
use crate::layout::{shard_corpus, Corpus, QueryBatch, ELEMENT_BYTES};
use crate::nma::NmaOffloadResult;
use crate::{Error, Nanos, Result};

/// Monotonic time source for measured aggregation.
pub trait MonotonicClock {
    fn now(&self) -> Nanos;
}

/// How the aggregation phase is timed.
#[derive(Clone, Copy)]
pub enum AggregationTiming<'a> {
    /// Wall-clock time of the real reduction on this machine.
    Measured(&'a dyn MonotonicClock),
    /// Calibrated constants; bit-stable across runs.
    Calibrated(&'a CalibratedAggregation),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchRequest {
    pub queries: QueryBatch,
    /// 1..=32
    pub k: usize,
    pub tenant: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlobalTopK {
    /// One list per query, best first.
    pub per_query: Vec<Vec<GlobalEntry>>,
    /// Some query received fewer than `k` entries.
    pub short: bool,
}

/// Proof that every write issued before it is visible to the NMAs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlushToken {
    pub sequence: u64,
    /// Dirty vectors written back by this flush.
    pub flushed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub topk: GlobalTopK,
    pub latency: LatencyBreakdown,
    /// Global ids written by the host but not flushed before the search.
    pub stale: Vec<u64>,
}

/// Corpus placed on one or more IKS units plus the host-side runtime state.
#[derive(Clone, Debug)]
pub struct IksSystem {
    cfg: DeviceConfig,
    dim: usize,
    n_vectors: u64,
    units: Vec<IksUnit>,
    /// Global id of the first vector of every shard, unit-major.
    offsets: Vec<u64>,
    /// Vectors written by the host that still sit in its caches.
    dirty: BTreeMap<u64, Vec<f16>>,
    flushes: u64,
    trace: EventTrace,
    now: Nanos,
}

impl IksSystem {
    /// Shards `corpus` contiguously over `units * packages_per_unit` packages.
    pub fn place(corpus: &Corpus, units: usize, cfg: DeviceConfig) -> Result<Self> {
        cfg.validate()?;
        let sharded = shard_corpus(
            corpus,
            units,
            cfg.packages_per_unit,
            cfg.package_capacity_bytes,
            0,
        )?;
        let mut shards = sharded.shards.into_iter();
        let units = (0..units)
            .map(|_| IksUnit::new(shards.by_ref().take(cfg.packages_per_unit).collect(), &cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: corpus.dim(),
            n_vectors: corpus.len() as u64,
            units,
            offsets: sharded.offsets,
            dirty: BTreeMap::new(),
            flushes: 0,
            trace: EventTrace::new(),
            now: Nanos::ZERO,
            cfg,
        })
    }

    pub fn config(&self) -> &DeviceConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vectors(&self) -> u64 {
        self.n_vectors
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn units(&self) -> &[IksUnit] {
        &self.units
    }

    /// Unpadded corpus size.
    pub fn corpus_bytes(&self) -> u64 {
        self.n_vectors * (self.dim * ELEMENT_BYTES) as u64
    }

    pub fn trace(&self) -> &EventTrace {
        &self.trace
    }

    pub fn take_trace(&mut self) -> EventTrace {
        core::mem::take(&mut self.trace)
    }

    /// Simulated time at which the last search completed.
    pub fn now(&self) -> Nanos {
        self.now
    }

    fn locate(&self, global: u64) -> Option<(usize, usize, usize)> {
        let ppu = self.cfg.packages_per_unit;
        let shard = self.offsets.partition_point(|&o| o <= global).checked_sub(1)?;
        // empty trailing shards share their successor's offset
        let shard = (0..=shard).rev().find(|&s| {
            let n = self.units[s / ppu].shards()[s % ppu].n_vectors() as u64;
            global < self.offsets[s] + n
        })?;
        let local = (global - self.offsets[shard]) as usize;
        Some((shard / ppu, shard % ppu, local))
    }

    /// Host store to a corpus vector. It stays in the host caches until
    /// [`IksSystem::flush_before_search`].
    pub fn write_vector(&mut self, global_id: u64, values: &[f16]) -> Result<()> {
        if values.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: values.len(),
            });
        }
        if global_id >= self.n_vectors {
            return Err(Error::IdOutOfRange {
                id: global_id,
                len: self.n_vectors,
            });
        }
        self.dirty.insert(global_id, values.to_vec());
        Ok(())
    }

    /// Writes back every dirty vector so the next search sees it.
    pub fn flush_before_search(&mut self) -> FlushToken {
        let dirty = core::mem::take(&mut self.dirty);
        let flushed = dirty.len();
        for (id, values) in dirty {
            let (unit, package, local) = self.locate(id).expect("dirty id was range checked");
            self.units[unit]
                .shard_mut(package)
                .write_vector(local, &values)
                .expect("dirty vector was dimension checked");
        }
        self.flushes += 1;
        if flushed > 0 {
            self.trace.push(TraceRecord {
                time: self.now,
                actor: Actor::Host,
                event: TraceEvent::Flush,
                state: self.units[0].state(),
            });
        }
        FlushToken {
            sequence: self.flushes,
            flushed,
        }
    }

    fn record(&mut self, time: Nanos, actor: Actor, event: ProtocolEvent, state: DoorbellState) {
        self.trace.push(TraceRecord {
            time,
            actor,
            event: TraceEvent::Protocol(event),
            state,
        });
    }

    fn check_request(&self, req: &SearchRequest) -> Result<()> {
        if req.k == 0 {
            return Err(Error::ZeroK);
        }
        if req.k > self.cfg.nma.hw_k {
            return Err(Error::KTooLarge {
                requested: req.k,
                hardware: self.cfg.nma.hw_k,
            });
        }
        if req.queries.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: req.queries.dim(),
            });
        }
        if req.queries.len() > self.cfg.nma.engines {
            return Err(Error::BatchOverflow {
                batch: req.queries.len(),
                engines: self.cfg.nma.engines,
            });
        }
        Ok(())
    }

    /// Blocking search over every unit: write context, ring, wait, read the
    /// partial lists and reduce them on the host.
    pub fn search<R: PackageRunner + ?Sized>(
        &mut self,
        req: &SearchRequest,
        timing: AggregationTiming<'_>,
        runner: &R,
    ) -> Result<SearchOutcome> {
        self.check_request(req)?;
        if self.units.is_empty() {
            return Err(Error::PlacementMissing);
        }
        if let Some(busy) = self.units.iter().find(|u| u.state() != DoorbellState::Idle) {
            return Err(Error::Protocol {
                state: busy.state(),
                event: ProtocolEvent::WriteContext,
            });
        }
        let t0 = self.now;
        let stale: Vec<u64> = self.dirty.keys().copied().collect();
        if !stale.is_empty() {
            self.trace.push(TraceRecord {
                time: t0,
                actor: Actor::Host,
                event: TraceEvent::StaleHazard,
                state: DoorbellState::Idle,
            });
        }

        // every unit has its own link, so context writes overlap
        let write = self.cfg.context_write_time(req.queries.payload_bytes());
        let rung = t0 + write;
        for u in 0..self.units.len() {
            let ctx = OffloadContext::for_shards(req.queries.clone(), self.units[u].shards());
            let s = self.units[u].write_context(ctx)?;
            self.record(rung, Actor::Host, ProtocolEvent::WriteContext, s);
            let s = self.units[u].ring()?;
            self.record(rung, Actor::Host, ProtocolEvent::RingDoorbell, s);
        }

        let mut finish = Vec::with_capacity(self.units.len());
        for u in 0..self.units.len() {
            let outcome = self.units[u].execute(&self.cfg, runner)?;
            self.record(rung, Actor::Device(u), ProtocolEvent::DeviceObserve, DoorbellState::NmaBusy);
            finish.push((outcome.dot_product, u));
        }
        finish.sort_by(|a, b| a.0.as_ns().total_cmp(&b.0.as_ns()));
        let mut dot = Nanos::ZERO;
        for &(unit_dot, u) in &finish {
            let done = rung + unit_dot;
            self.record(done, Actor::Device(u), ProtocolEvent::WriteResults, DoorbellState::ResultsWritten);
            let s = self.units[u].notify()?;
            self.record(done, Actor::Device(u), ProtocolEvent::NotifyHost, s);
            dot = dot.max(unit_dot);
        }

        // partial lists come back one unit after another
        let read_one = self.cfg.partial_read_time(req.queries.len());
        let mut results: Vec<NmaOffloadResult> = Vec::new();
        let mut read = Nanos::ZERO;
        for u in 0..self.units.len() {
            results.extend(self.units[u].consume()?);
            read += read_one;
            self.record(t0 + write + dot + read, Actor::Host, ProtocolEvent::ConsumeResults, DoorbellState::Idle);
        }

        let batch = req.queries.len();
        let reduce = |results: &[NmaOffloadResult]| -> Vec<AggregatedList> {
            (0..batch)
                .map(|q| {
                    let partials: Vec<ShardPartial> = results
                        .iter()
                        .zip(&self.offsets)
                        .map(|(r, &offset)| ShardPartial {
                            offset,
                            list: &r.partials[q],
                        })
                        .collect();
                    aggregate_topk(&partials, self.cfg.nma.hw_k)
                })
                .collect()
        };
        let (lists, aggregation) = match timing {
            AggregationTiming::Measured(clock) => {
                let start = clock.now();
                let lists = reduce(&results);
                (lists, clock.now() - start)
            }
            AggregationTiming::Calibrated(model) => {
                let entries = (self.units.len() * self.cfg.packages_per_unit * batch * self.cfg.nma.hw_k) as u64;
                let t = model.time(self.corpus_bytes(), batch, self.units.len(), entries);
                (reduce(&results), t)
            }
        };

        // the device always returns hw_k entries; K only trims the answer
        let per_query: Vec<Vec<GlobalEntry>> = lists
            .into_iter()
            .map(|mut l| {
                l.entries.truncate(req.k);
                l.entries
            })
            .collect();
        let short = per_query.iter().any(|l| l.len() < req.k);
        let latency = LatencyBreakdown::new(write, dot, read, aggregation);
        self.now = t0 + latency.total;
        Ok(SearchOutcome {
            topk: GlobalTopK { per_query, short },
            latency,
            stale,
        })
    }
}

/// Blocking search on a placed corpus.
pub fn iks_search<R: PackageRunner + ?Sized>(
    system: &mut IksSystem,
    req: &SearchRequest,
    timing: AggregationTiming<'_>,
    runner: &R,
) -> Result<SearchOutcome> {
    system.search(req, timing, runner)
}

/// Places `corpus` on `units` units and runs one search across all of them.
pub fn multi_unit_search<R: PackageRunner + ?Sized>(
    corpus: &Corpus,
    req: &SearchRequest,
    units: usize,
    cfg: &DeviceConfig,
    timing: AggregationTiming<'_>,
    runner: &R,
) -> Result<SearchOutcome> {
    let mut system = IksSystem::place(corpus, units, cfg.clone())?;
    system.search(req, timing, runner)
}
