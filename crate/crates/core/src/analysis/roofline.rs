use alloc::string::String;

use crate::device::DeviceConfig;
use crate::{Error, Nanos, Result};

/// A processor described by its compute and memory ceilings.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineModel {
    pub name: String,
    /// flop/s
    pub peak_flops: f64,
    /// bytes/s
    pub mem_bandwidth: f64,
}

impl MachineModel {
    pub fn new(name: &str, peak_flops: f64, mem_bandwidth: f64) -> Result<Self> {
        if !(peak_flops > 0.0 && mem_bandwidth > 0.0) {
            return Err(Error::InvalidConfig("machine ceilings must be positive"));
        }
        Ok(Self {
            name: name.into(),
            peak_flops,
            mem_bandwidth,
        })
    }

    /// 16-core Xeon 4416+ with two AVX-512 FMA units per core, 8 x DDR5-4000.
    pub fn cpu() -> Self {
        Self::new("cpu", 16.0 * 164e9, 256e9).unwrap()
    }

    /// Same CPU using AMX tiles (bfloat16).
    pub fn amx() -> Self {
        Self::new("amx", 16.0 * 500e9, 256e9).unwrap()
    }

    /// H100 SXM.
    pub fn gpu() -> Self {
        Self::new("gpu", 1979e12, 3.35e12).unwrap()
    }

    /// IKS unit with its published rounded ceilings.
    pub fn iks() -> Self {
        Self::new("iks", 69.9e12, 1.1e12).unwrap()
    }

    /// IKS unit with ceilings derived from a device configuration, one MAC
    /// counted as two flops.
    pub fn iks_from(cfg: &DeviceConfig) -> Self {
        let packages = cfg.packages_per_unit as f64;
        let macs = (cfg.nma.engines * cfg.nma.macs_per_engine) as f64;
        Self {
            name: "iks-derived".into(),
            peak_flops: packages * macs * 2.0 * cfg.nma.clock_hz,
            mem_bandwidth: packages * cfg.package_bandwidth,
        }
    }

    /// Intensity at which the compute roof takes over.
    pub fn ridge_point(&self) -> f64 {
        self.peak_flops / self.mem_bandwidth
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Memory,
    Compute,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RooflinePoint {
    pub intensity: f64,
    pub attainable_flops: f64,
    pub bound: Bound,
}

/// flop per byte of a batched scan: every 2-byte element read feeds one MAC
/// (two flops) per query.
pub fn arithmetic_intensity(batch: usize) -> f64 {
    batch as f64
}

pub fn roofline(machine: &MachineModel, batch: usize) -> Result<RooflinePoint> {
    if batch == 0 {
        return Err(Error::EmptyBatch);
    }
    let intensity = arithmetic_intensity(batch);
    let memory_roof = intensity * machine.mem_bandwidth;
    let (attainable_flops, bound) = if memory_roof < machine.peak_flops {
        (memory_roof, Bound::Memory)
    } else {
        (machine.peak_flops, Bound::Compute)
    };
    Ok(RooflinePoint {
        intensity,
        attainable_flops,
        bound,
    })
}

/// Lower-bound scan time on `machine` at the given fraction of its ceilings.
pub fn baseline_time(
    machine: &MachineModel,
    corpus_bytes: u64,
    batch: usize,
    efficiency: f64,
) -> Result<Nanos> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::InvalidConfig("efficiency must be in (0, 1]"));
    }
    if batch == 0 {
        return Err(Error::EmptyBatch);
    }
    let memory = Nanos::for_bytes(corpus_bytes as f64, efficiency * machine.mem_bandwidth);
    let flops = corpus_bytes as f64 * arithmetic_intensity(batch);
    let compute = Nanos::for_bytes(flops, efficiency * machine.peak_flops);
    Ok(memory.max(compute))
}
