//! One IKS unit: eight NMAs, each beside an LPDDR5X package, behind a CXL
//! controller.

mod doorbell;
mod offload;
mod tenancy;
mod trace;

pub use doorbell::{step_doorbell, Doorbell, DoorbellState, Owner, ProtocolEvent};
pub use offload::{
    execute_offload, IksUnit, OffloadContext, OffloadOutcome, PackageDescriptor, PackageRunner,
    SequentialRunner,
};
pub use tenancy::{
    schedule_tenants, PackageSet, SearchSlot, Sharing, TenantPlan, TenantRequest, TenantSchedule,
};
pub use trace::{Actor, EventTrace, TraceEvent, TraceRecord};

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::EnergyModel;
use crate::nma::NmaConfig;
use crate::{Error, Nanos, Result, GIB};

/// Context write: (payload bytes, time) at batch 1 and 64, VD = 768.
pub const WRITE_CALIBRATION: [(u64, Nanos); 2] = [(1536, Nanos(300.0)), (98_304, Nanos(1000.0))];
/// Partial-list read over 8 packages with 6-byte entries, batch 1 and 64.
pub const READ_CALIBRATION: [(u64, Nanos); 2] = [(1536, Nanos(700.0)), (98_304, Nanos(22_400.0))];
/// Context-write bandwidth of the cache-coherent path over plain
/// non-temporal stores.
pub const COHERENT_WRITE_ADVANTAGE: f64 = 1.6;
/// Interleave granule of memory-expander mode.
pub const INTERLEAVE_BYTES: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    HostToDevice,
    DeviceToHost,
}

/// Affine transfer cost: fixed latency plus bytes over bandwidth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferModel {
    pub latency: Nanos,
    /// Bytes per second.
    pub bandwidth: f64,
}

impl TransferModel {
    /// Solves for the line through two (bytes, time) points.
    pub fn fit(a: (u64, Nanos), b: (u64, Nanos)) -> Result<Self> {
        let (db, dt) = (b.0 as f64 - a.0 as f64, b.1.as_ns() - a.1.as_ns());
        if !(db > 0.0 && dt > 0.0) {
            return Err(Error::InvalidConfig(
                "transfer calibration points must increase in size and time",
            ));
        }
        let bandwidth = db / dt * 1e9;
        let latency = a.1 - Nanos::for_bytes(a.0 as f64, bandwidth);
        if latency.as_ns() < 0.0 {
            return Err(Error::InvalidConfig("transfer calibration implies negative latency"));
        }
        Ok(Self { latency, bandwidth })
    }

    pub fn time(&self, bytes: u64) -> Nanos {
        self.latency + Nanos::for_bytes(bytes as f64, self.bandwidth)
    }
}

/// How the offload context reaches the device.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Datapath {
    /// Cached stores to a coherent shared window (CXL.cache).
    CacheCoherent,
    /// Non-temporal stores emulating an MMIO path (CXL.io).
    NonTemporalMmio,
}

/// Whether one context write reaches all NMAs or each is written in turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContextWrite {
    Broadcast,
    Serial,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviceConfig {
    pub packages_per_unit: usize,
    pub package_capacity_bytes: u64,
    /// LPDDR5X bandwidth per package, bytes per second.
    pub package_bandwidth: f64,
    /// NMA to CXL controller uplink, bytes per second.
    pub uplink_bandwidth: f64,
    pub nma: NmaConfig,
    pub write: TransferModel,
    pub read: TransferModel,
    pub datapath: Datapath,
    pub context_write: ContextWrite,
    /// Score (2 bytes) plus vector id (4 bytes).
    pub partial_entry_bytes: u64,
    pub energy: EnergyModel,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        let [w0, w1] = WRITE_CALIBRATION;
        let [r0, r1] = READ_CALIBRATION;
        Self {
            packages_per_unit: 8,
            // 512 Gb per package
            package_capacity_bytes: 64 * GIB,
            package_bandwidth: 136e9,
            uplink_bandwidth: 8e9,
            nma: NmaConfig::default(),
            write: TransferModel::fit(w0, w1).expect("write calibration"),
            read: TransferModel::fit(r0, r1).expect("read calibration"),
            datapath: Datapath::CacheCoherent,
            context_write: ContextWrite::Broadcast,
            partial_entry_bytes: 6,
            energy: EnergyModel::default(),
        }
    }
}

impl DeviceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.packages_per_unit == 0 || self.packages_per_unit > PackageSet::MAX_PACKAGES {
            return Err(Error::InvalidConfig("packages_per_unit must be in 1..=64"));
        }
        let positive = [
            self.package_bandwidth,
            self.uplink_bandwidth,
            self.write.bandwidth,
            self.read.bandwidth,
        ];
        if positive.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::InvalidConfig("bandwidths must be positive"));
        }
        if self.write.latency.as_ns() < 0.0 || self.read.latency.as_ns() < 0.0 {
            return Err(Error::InvalidConfig("transfer latencies must be non-negative"));
        }
        self.nma.validate()
    }

    /// Host-to-device bandwidth after the datapath choice.
    pub fn context_write_bandwidth(&self) -> f64 {
        match self.datapath {
            Datapath::CacheCoherent => self.write.bandwidth,
            Datapath::NonTemporalMmio => self.write.bandwidth / COHERENT_WRITE_ADVANTAGE,
        }
    }

    pub fn unit_capacity_bytes(&self) -> u64 {
        self.package_capacity_bytes * self.packages_per_unit as u64
    }

    /// Bytes of all partial lists one unit returns for a batch.
    pub fn partial_read_bytes(&self, batch: usize) -> u64 {
        (self.packages_per_unit * batch * self.nma.hw_k) as u64 * self.partial_entry_bytes
    }

    /// Time to write a context carrying `payload` query bytes.
    pub fn context_write_time(&self, payload: u64) -> Nanos {
        let once = transfer_time(payload, Direction::HostToDevice, self);
        match self.context_write {
            ContextWrite::Broadcast => once,
            ContextWrite::Serial => once * self.packages_per_unit as f64,
        }
    }

    /// Time to read one unit's partial lists for a batch.
    pub fn partial_read_time(&self, batch: usize) -> Nanos {
        transfer_time(self.partial_read_bytes(batch), Direction::DeviceToHost, self)
    }
}

/// CXL transfer time under the affine model.
pub fn transfer_time(bytes: u64, direction: Direction, cfg: &DeviceConfig) -> Nanos {
    match direction {
        Direction::HostToDevice => {
            cfg.write.latency + Nanos::for_bytes(bytes as f64, cfg.context_write_bandwidth())
        }
        Direction::DeviceToHost => cfg.read.time(bytes),
    }
}

/// Memory-expander read: data interleaved over all packages and pulled over
/// every uplink in parallel.
pub fn expander_read_time(bytes: u64, cfg: &DeviceConfig) -> Nanos {
    let aggregate = cfg.packages_per_unit as f64 * cfg.uplink_bandwidth;
    Nanos::for_bytes(bytes as f64, aggregate) + cfg.read.latency
}

/// Bytes each package serves for an interleaved read starting at address 0.
pub fn expander_interleave(bytes: u64, cfg: &DeviceConfig) -> Vec<u64> {
    let packages = cfg.packages_per_unit as u64;
    let granules = bytes / INTERLEAVE_BYTES;
    let tail = bytes % INTERLEAVE_BYTES;
    let mut share = vec![0u64; cfg.packages_per_unit];
    for (p, s) in share.iter_mut().enumerate() {
        let p = p as u64;
        *s = (granules / packages + u64::from(p < granules % packages)) * INTERLEAVE_BYTES;
        if tail > 0 && p == granules % packages {
            *s += tail;
        }
    }
    share
}
