//! Scenario files (TOML).
//!
//! ```toml
//! mode = "analytic"            # or "functional"
//! seed = 7
//! aggregation = "calibrated"   # or "measured"
//!
//! [device]                     # any DeviceConfig field may be overridden
//! packages_per_unit = 8
//!
//! [workload]
//! corpus_bytes = [50_000_000_000, 512_000_000_000]
//! dim = 768
//! batch_sizes = [1, 64]
//! k_values = [32]
//! units = [1]
//!
//! [[baselines]]
//! machine = "cpu"
//! efficiency = 0.8
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use iks_core::analysis::{AreaConfig, MachineModel};
use iks_core::device::{ContextWrite, Datapath, DeviceConfig, TransferModel};
use iks_core::layout::{MAX_BATCH, MAX_DIM};
use iks_core::Nanos;

use crate::{SimError, SimResult};

/// Largest corpus a functional run may materialize unless overridden.
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Functional,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Calibrated,
    Measured,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub aggregation: Aggregation,
    /// Compare every functional result with the exhaustive oracle.
    #[serde(default)]
    pub oracle_check: bool,
    #[serde(default = "default_budget")]
    pub memory_budget_bytes: u64,
    #[serde(default)]
    pub device: DeviceOverrides,
    #[serde(default)]
    pub area: AreaOverrides,
    pub workload: Workload,
    #[serde(default)]
    pub baselines: Vec<Baseline>,
    #[serde(default)]
    pub output: Output,
}

fn default_budget() -> u64 {
    DEFAULT_MEMORY_BUDGET
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    /// Analytic corpus sizes in bytes.
    #[serde(default)]
    pub corpus_bytes: Vec<u64>,
    pub dim: Option<usize>,
    pub batch_sizes: Vec<usize>,
    #[serde(default = "default_k")]
    pub k_values: Vec<usize>,
    #[serde(default = "default_units")]
    pub units: Vec<usize>,
    /// Functional corpus stored as a shard file, relative to the scenario.
    pub corpus_file: Option<PathBuf>,
    pub synthetic: Option<Synthetic>,
}

fn default_k() -> Vec<usize> {
    vec![32]
}

fn default_units() -> Vec<usize> {
    vec![1]
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Synthetic {
    pub n: usize,
    pub dim: usize,
    /// Defaults to the scenario seed.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseline {
    /// cpu, amx, gpu, iks, iks-derived, or any name with explicit ceilings.
    pub machine: String,
    pub efficiency: f64,
    pub peak_flops: Option<f64>,
    pub mem_bandwidth: Option<f64>,
}

impl Baseline {
    pub fn model(&self, cfg: &DeviceConfig) -> SimResult<MachineModel> {
        let mut m = match self.machine.as_str() {
            "cpu" => MachineModel::cpu(),
            "amx" => MachineModel::amx(),
            "gpu" => MachineModel::gpu(),
            "iks" => MachineModel::iks(),
            "iks-derived" => MachineModel::iks_from(cfg),
            other => match (self.peak_flops, self.mem_bandwidth) {
                (Some(p), Some(b)) => MachineModel::new(other, p, b)?,
                _ => {
                    return Err(SimError::Scenario(format!(
                        "baseline `{other}` needs peak_flops and mem_bandwidth"
                    )))
                }
            },
        };
        if let Some(p) = self.peak_flops {
            m.peak_flops = p;
        }
        if let Some(b) = self.mem_bandwidth {
            m.mem_bandwidth = b;
        }
        Ok(MachineModel::new(&m.name, m.peak_flops, m.mem_bandwidth)?)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_csv")]
    pub latency_csv: String,
    #[serde(default = "default_json")]
    pub report_json: String,
    #[serde(default = "default_jsonl")]
    pub results_jsonl: String,
    /// Event trace file name; functional mode only.
    pub trace: Option<String>,
}

fn default_dir() -> PathBuf {
    "iks-out".into()
}
fn default_csv() -> String {
    "latency.csv".into()
}
fn default_json() -> String {
    "report.json".into()
}
fn default_jsonl() -> String {
    "results.jsonl".into()
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            latency_csv: default_csv(),
            report_json: default_json(),
            results_jsonl: default_jsonl(),
            trace: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferOverride {
    pub latency_ns: f64,
    /// bytes per second
    pub bandwidth: f64,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NmaOverrides {
    pub engines: Option<usize>,
    pub macs_per_engine: Option<usize>,
    pub clock_hz: Option<f64>,
    pub hw_k: Option<usize>,
    pub bytes_per_cycle: Option<usize>,
    pub query_scratchpad_bytes: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyOverrides {
    pub sram_j_per_bit: Option<f64>,
    pub dram_j_per_bit: Option<f64>,
    pub engine_power_w: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceOverrides {
    pub packages_per_unit: Option<usize>,
    pub package_capacity_bytes: Option<u64>,
    pub package_bandwidth: Option<f64>,
    pub uplink_bandwidth: Option<f64>,
    /// "cache-coherent" or "non-temporal"
    pub datapath: Option<String>,
    /// "broadcast" or "serial"
    pub context_write: Option<String>,
    pub partial_entry_bytes: Option<u64>,
    pub write: Option<TransferOverride>,
    pub read: Option<TransferOverride>,
    #[serde(default)]
    pub nma: NmaOverrides,
    #[serde(default)]
    pub energy: EnergyOverrides,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaOverrides {
    pub logic_area_mm2: Option<f64>,
    pub phy_mc_area_mm2: Option<f64>,
    pub lpddr_shoreline_mm: Option<f64>,
    pub pcie_shoreline_mm: Option<f64>,
    pub channel_phy_shoreline_mm: Option<f64>,
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn transfer(o: TransferOverride) -> TransferModel {
    TransferModel {
        latency: Nanos(o.latency_ns),
        bandwidth: o.bandwidth,
    }
}

impl DeviceOverrides {
    pub fn apply(&self) -> SimResult<DeviceConfig> {
        let mut cfg = DeviceConfig::default();
        set(&mut cfg.packages_per_unit, self.packages_per_unit);
        set(&mut cfg.package_capacity_bytes, self.package_capacity_bytes);
        set(&mut cfg.package_bandwidth, self.package_bandwidth);
        set(&mut cfg.uplink_bandwidth, self.uplink_bandwidth);
        set(&mut cfg.partial_entry_bytes, self.partial_entry_bytes);
        if let Some(w) = self.write {
            cfg.write = transfer(w);
        }
        if let Some(r) = self.read {
            cfg.read = transfer(r);
        }
        cfg.datapath = match self.datapath.as_deref() {
            None | Some("cache-coherent") => Datapath::CacheCoherent,
            Some("non-temporal") => Datapath::NonTemporalMmio,
            Some(other) => return Err(SimError::Scenario(format!("unknown datapath `{other}`"))),
        };
        cfg.context_write = match self.context_write.as_deref() {
            None | Some("broadcast") => ContextWrite::Broadcast,
            Some("serial") => ContextWrite::Serial,
            Some(other) => {
                return Err(SimError::Scenario(format!("unknown context_write `{other}`")))
            }
        };
        let n = &self.nma;
        set(&mut cfg.nma.engines, n.engines);
        set(&mut cfg.nma.macs_per_engine, n.macs_per_engine);
        set(&mut cfg.nma.clock_hz, n.clock_hz);
        set(&mut cfg.nma.hw_k, n.hw_k);
        set(&mut cfg.nma.bytes_per_cycle, n.bytes_per_cycle);
        set(&mut cfg.nma.query_scratchpad_bytes, n.query_scratchpad_bytes);
        let e = &self.energy;
        set(&mut cfg.energy.sram_j_per_bit, e.sram_j_per_bit);
        set(&mut cfg.energy.dram_j_per_bit, e.dram_j_per_bit);
        set(&mut cfg.energy.engine_power_w, e.engine_power_w);
        cfg.validate()?;
        Ok(cfg)
    }
}

impl AreaOverrides {
    pub fn apply(&self) -> AreaConfig {
        let mut cfg = AreaConfig::default();
        set(&mut cfg.logic_area_mm2, self.logic_area_mm2);
        set(&mut cfg.phy_mc_area_mm2, self.phy_mc_area_mm2);
        set(&mut cfg.lpddr_shoreline_mm, self.lpddr_shoreline_mm);
        set(&mut cfg.pcie_shoreline_mm, self.pcie_shoreline_mm);
        set(&mut cfg.channel_phy_shoreline_mm, self.channel_phy_shoreline_mm);
        cfg
    }
}

/// Where a functional corpus comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum CorpusSource {
    File(PathBuf),
    Synthetic { n: usize, dim: usize, seed: u64 },
}

impl Scenario {
    pub fn parse(text: &str) -> SimResult<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| SimError::Scenario(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    /// Reads a scenario; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        let mut s = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(f) = &s.workload.corpus_file {
            s.workload.corpus_file = Some(base.join(f));
        }
        if s.output.dir.is_relative() {
            s.output.dir = base.join(&s.output.dir);
        }
        Ok(s)
    }

    /// Replaces the scenario seed, including an explicit synthetic seed.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        if let Some(s) = &mut self.workload.synthetic {
            s.seed = None;
        }
    }

    pub fn device_config(&self) -> SimResult<DeviceConfig> {
        self.device.apply()
    }

    pub fn corpus_source(&self) -> Option<CorpusSource> {
        if let Some(f) = &self.workload.corpus_file {
            return Some(CorpusSource::File(f.clone()));
        }
        self.workload.synthetic.map(|s| CorpusSource::Synthetic {
            n: s.n,
            dim: s.dim,
            seed: s.seed.unwrap_or(self.seed),
        })
    }

    pub fn validate(&self) -> SimResult<()> {
        let bad = |m: String| Err(SimError::Scenario(m));
        let cfg = self.device_config()?;
        let w = &self.workload;
        if w.batch_sizes.is_empty() {
            return bad("workload.batch_sizes is empty".into());
        }
        if let Some(&b) = w.batch_sizes.iter().find(|&&b| b == 0 || b > MAX_BATCH.min(cfg.nma.engines)) {
            return bad(format!("batch size {b} outside 1..={}", MAX_BATCH.min(cfg.nma.engines)));
        }
        if w.k_values.is_empty() {
            return bad("workload.k_values is empty".into());
        }
        if let Some(&k) = w.k_values.iter().find(|&&k| k == 0 || k > cfg.nma.hw_k) {
            return bad(format!("K = {k} outside 1..={}", cfg.nma.hw_k));
        }
        if w.units.is_empty() || w.units.contains(&0) {
            return bad("workload.units must list positive unit counts".into());
        }
        for b in &self.baselines {
            if !(b.efficiency > 0.0 && b.efficiency <= 1.0) {
                return bad(format!("baseline `{}` efficiency must be in (0, 1]", b.machine));
            }
            b.model(&cfg)?;
        }
        match self.mode {
            Mode::Analytic => {
                if w.corpus_bytes.is_empty() {
                    return bad("analytic mode needs workload.corpus_bytes".into());
                }
                let Some(dim) = w.dim else {
                    return bad("analytic mode needs workload.dim".into());
                };
                if dim == 0 || dim > MAX_DIM {
                    return bad(format!("dim {dim} outside 1..={MAX_DIM}"));
                }
                if self.output.trace.is_some() {
                    return bad("event traces need functional mode".into());
                }
                if self.oracle_check {
                    return bad("oracle_check needs functional mode".into());
                }
                if self.aggregation == Aggregation::Measured {
                    return bad("measured aggregation needs functional mode".into());
                }
            }
            Mode::Functional => {
                if !w.corpus_bytes.is_empty() {
                    return bad("functional mode takes its size from the corpus, not corpus_bytes".into());
                }
                match (&w.corpus_file, &w.synthetic) {
                    (Some(_), Some(_)) => {
                        return bad("give either corpus_file or synthetic, not both".into())
                    }
                    (None, None) => return bad("functional mode needs a corpus".into()),
                    (None, Some(s)) => {
                        if s.dim == 0 || s.dim > MAX_DIM {
                            return bad(format!("dim {} outside 1..={MAX_DIM}", s.dim));
                        }
                        if w.dim.is_some_and(|d| d != s.dim) {
                            return bad("workload.dim disagrees with synthetic.dim".into());
                        }
                        let bytes = (s.n as u64).saturating_mul(2 * s.dim as u64);
                        if bytes > self.memory_budget_bytes {
                            return bad(format!(
                                "synthetic corpus of {bytes} bytes exceeds the memory budget of {}",
                                self.memory_budget_bytes
                            ));
                        }
                    }
                    (Some(_), None) => {}
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ANALYTIC: &str = r#"
mode = "analytic"
[workload]
corpus_bytes = [50_000_000_000]
dim = 768
batch_sizes = [1, 64]
"#;

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::parse(ANALYTIC).unwrap();
        assert_eq!(s.workload.k_values, vec![32]);
        assert_eq!(s.workload.units, vec![1]);
        assert_eq!(s.aggregation, Aggregation::Calibrated);
        assert_eq!(s.device_config().unwrap(), DeviceConfig::default());
        assert_eq!(s.output.latency_csv, "latency.csv");
    }

    #[test]
    fn device_overrides_apply() {
        let text = format!(
            "{ANALYTIC}\n[device]\npackages_per_unit = 4\ndatapath = \"non-temporal\"\n\
             context_write = \"serial\"\n[device.nma]\nclock_hz = 2e9\n\
             [device.write]\nlatency_ns = 100.0\nbandwidth = 1e11\n"
        );
        let cfg = Scenario::parse(&text).unwrap().device_config().unwrap();
        assert_eq!(cfg.packages_per_unit, 4);
        assert_eq!(cfg.datapath, Datapath::NonTemporalMmio);
        assert_eq!(cfg.context_write, ContextWrite::Serial);
        assert_eq!(cfg.nma.clock_hz, 2e9);
        assert_eq!(cfg.write.latency, Nanos(100.0));
    }

    #[test]
    fn invalid_scenarios_are_rejected() {
        let cases = [
            "mode = \"analytic\"\n[workload]\ndim = 768\nbatch_sizes = [1]\n",
            "mode = \"analytic\"\n[workload]\ncorpus_bytes = [1]\nbatch_sizes = [1]\n",
            "mode = \"analytic\"\n[workload]\ncorpus_bytes = [1]\ndim = 8\nbatch_sizes = [65]\n",
            "mode = \"analytic\"\n[workload]\ncorpus_bytes = [1]\ndim = 8\nbatch_sizes = [1]\nk_values = [33]\n",
            "mode = \"analytic\"\n[workload]\ncorpus_bytes = [1]\ndim = 8\nbatch_sizes = [1]\nunits = [0]\n",
            "mode = \"functional\"\n[workload]\nbatch_sizes = [1]\n",
            "mode = \"functional\"\nmemory_budget_bytes = 100\n[workload]\nbatch_sizes = [1]\n[workload.synthetic]\nn = 100\ndim = 8\n",
            "mode = \"warp\"\n[workload]\nbatch_sizes = [1]\n",
            "mode = \"analytic\"\ncolour = 1\n[workload]\ncorpus_bytes = [1]\ndim = 8\nbatch_sizes = [1]\n",
            "mode = \"analytic\"\n[device]\ndatapath = \"pigeon\"\n[workload]\ncorpus_bytes = [1]\ndim = 8\nbatch_sizes = [1]\n",
            "mode = \"analytic\"\n[workload]\ncorpus_bytes = [1]\ndim = 8\nbatch_sizes = [1]\n[[baselines]]\nmachine = \"tpu\"\nefficiency = 0.5\n",
            "mode = \"analytic\"\n[workload]\ncorpus_bytes = [1]\ndim = 8\nbatch_sizes = [1]\n[[baselines]]\nmachine = \"cpu\"\nefficiency = 1.5\n",
        ];
        for text in cases {
            let err = Scenario::parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{text}");
        }
    }

    #[test]
    fn synthetic_seed_falls_back_to_scenario_seed() {
        let s = Scenario::parse(
            "mode = \"functional\"\nseed = 9\n[workload]\nbatch_sizes = [1]\n[workload.synthetic]\nn = 10\ndim = 4\n",
        )
        .unwrap();
        assert_eq!(
            s.corpus_source(),
            Some(CorpusSource::Synthetic { n: 10, dim: 4, seed: 9 })
        );
    }

    #[test]
    fn custom_baseline_needs_ceilings() {
        let b = Baseline {
            machine: "box".into(),
            efficiency: 1.0,
            peak_flops: Some(1e12),
            mem_bandwidth: Some(1e11),
        };
        let m = b.model(&DeviceConfig::default()).unwrap();
        assert_eq!(m.name, "box");
        assert_eq!(m.ridge_point(), 10.0);
    }
}
