use crate::device::DeviceConfig;
use crate::{Error, Nanos, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyModel {
    /// Query scratchpad SRAM access energy, J/bit.
    pub sram_j_per_bit: f64,
    /// LPDDR5X access energy, J/bit.
    pub dram_j_per_bit: f64,
    /// One active processing engine including its scratchpad reads, W.
    pub engine_power_w: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            sram_j_per_bit: 39e-15,
            dram_j_per_bit: 4e-12,
            engine_power_w: 0.059,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerReport {
    pub engine_power: f64,
    pub dram_power: f64,
    pub total: f64,
    /// Total power over the dot-product phase. CXL transfers are excluded.
    pub energy_per_search: f64,
}

/// Power of one unit streaming at full bandwidth with `batch` active engines
/// per NMA.
pub fn power_model(batch: usize, cfg: &DeviceConfig, dot_product: Nanos) -> Result<PowerReport> {
    if batch == 0 || batch > cfg.nma.engines {
        return Err(Error::BatchOverflow {
            batch,
            engines: cfg.nma.engines,
        });
    }
    let packages = cfg.packages_per_unit as f64;
    let engine_power = packages * batch as f64 * cfg.energy.engine_power_w;
    let dram_power = packages * cfg.package_bandwidth * 8.0 * cfg.energy.dram_j_per_bit;
    let total = engine_power + dram_power;
    Ok(PowerReport {
        engine_power,
        dram_power,
        total,
        energy_per_search: total * dot_product.as_secs(),
    })
}

/// DRAM energy of one scan; embedding reads are shared by the whole batch.
pub fn dram_energy(corpus_bytes: u64, cfg: &DeviceConfig) -> f64 {
    corpus_bytes as f64 * 8.0 * cfg.energy.dram_j_per_bit
}

/// Scratchpad read energy of one scan, for sensitivity studies. The engine
/// power figure already includes it.
pub fn scratchpad_energy(n_vectors: u64, dim: usize, batch: usize, cfg: &DeviceConfig) -> f64 {
    (n_vectors * dim as u64 * 16 * batch as u64) as f64 * cfg.energy.sram_j_per_bit
}
