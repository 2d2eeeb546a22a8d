//! Latency table (CSV) and the power/area/roofline report (JSON).

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use iks_core::analysis::{
    area_model, baseline_time, monolithic_area, roofline, AreaConfig, Bound, LatencyBreakdown,
    MachineModel, PowerReport,
};
use iks_core::device::DeviceConfig;

use crate::results::LatencyNs;

pub const CSV_HEADER: &str =
    "corpus_bytes,batch,units,K,write_us,dot_ms,read_us,agg_us,total_ms,power_w,energy_j";

/// LPDDR5X channels behind one NMA.
pub const CHANNELS_PER_PACKAGE: usize = 8;

/// One scenario point.
#[derive(Clone, Debug, PartialEq)]
pub struct LatencyRow {
    pub corpus_bytes: u64,
    pub batch: usize,
    pub units: usize,
    pub k: usize,
    pub latency: LatencyBreakdown,
    pub power: PowerReport,
}

impl LatencyRow {
    fn csv_line(&self) -> String {
        let l = &self.latency;
        format!(
            "{},{},{},{},{:.3},{:.6},{:.3},{:.3},{:.6},{:.3},{:.6}",
            self.corpus_bytes,
            self.batch,
            self.units,
            self.k,
            l.write_query.as_us(),
            l.dot_product.as_ms(),
            l.partial_read.as_us(),
            l.aggregation.as_us(),
            l.total.as_ms(),
            self.power.total,
            self.power.energy_per_search,
        )
    }
}

pub fn write_csv<W: Write>(mut out: W, rows: &[LatencyRow]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerEntry {
    pub batch: usize,
    pub engine_w: f64,
    pub dram_w: f64,
    pub total_w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaEntry {
    pub logic_mm2: f64,
    pub phy_mc_mm2: f64,
    pub shoreline_mm: f64,
    pub min_die_mm2: f64,
    pub reported_mm2: f64,
    pub monolithic_channels: usize,
    pub monolithic_mm2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RooflineSample {
    pub batch: usize,
    pub intensity: f64,
    pub attainable_flops: f64,
    pub bound: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RooflineEntry {
    pub machine: String,
    pub peak_flops: f64,
    pub mem_bandwidth: f64,
    pub ridge_point: f64,
    pub samples: Vec<RooflineSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub machine: String,
    pub efficiency: f64,
    pub time_ns: f64,
    /// Baseline scan time over the IKS total.
    pub speedup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointEntry {
    pub corpus_bytes: u64,
    pub batch: usize,
    pub units: usize,
    pub k: usize,
    pub latency_ns: LatencyNs,
    pub power_w: f64,
    pub energy_j: f64,
    pub baselines: Vec<BaselineEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub mode: String,
    pub seed: u64,
    pub power: Vec<PowerEntry>,
    pub area: AreaEntry,
    pub roofline: Vec<RooflineEntry>,
    pub points: Vec<PointEntry>,
}

pub const SCHEMA: &str = "iks-report/1";

fn bound_name(b: Bound) -> String {
    match b {
        Bound::Memory => "memory".into(),
        Bound::Compute => "compute".into(),
    }
}

/// Everything the JSON report needs besides the rows.
pub struct ReportInput<'a> {
    pub mode: &'a str,
    pub seed: u64,
    pub device: &'a DeviceConfig,
    pub area: &'a AreaConfig,
    pub batch_sizes: &'a [usize],
    /// Machine models with the efficiency to charge them.
    pub baselines: &'a [(MachineModel, f64)],
    pub rows: &'a [LatencyRow],
}

pub fn build_report(input: &ReportInput<'_>) -> iks_core::Result<Report> {
    let power = input
        .batch_sizes
        .iter()
        .map(|&b| {
            let p = iks_core::analysis::power_model(b, input.device, iks_core::Nanos::ZERO)?;
            Ok(PowerEntry {
                batch: b,
                engine_w: p.engine_power,
                dram_w: p.dram_power,
                total_w: p.total,
            })
        })
        .collect::<iks_core::Result<Vec<_>>>()?;

    let a = area_model(input.area);
    let channels = input.device.packages_per_unit * CHANNELS_PER_PACKAGE;
    let area = AreaEntry {
        logic_mm2: a.logic_area,
        phy_mc_mm2: a.phy_mc_area,
        shoreline_mm: a.shoreline,
        min_die_mm2: a.min_die_area,
        reported_mm2: a.reported,
        monolithic_channels: channels,
        monolithic_mm2: monolithic_area(channels, input.area),
    };

    let mut machines = vec![MachineModel::iks_from(input.device)];
    for (m, _) in input.baselines {
        if !machines.iter().any(|x| x.name == m.name) {
            machines.push(m.clone());
        }
    }
    let roofline = machines
        .iter()
        .map(|m| {
            let samples = input
                .batch_sizes
                .iter()
                .map(|&b| {
                    let p = roofline(m, b)?;
                    Ok(RooflineSample {
                        batch: b,
                        intensity: p.intensity,
                        attainable_flops: p.attainable_flops,
                        bound: bound_name(p.bound),
                    })
                })
                .collect::<iks_core::Result<Vec<_>>>()?;
            Ok(RooflineEntry {
                machine: m.name.clone(),
                peak_flops: m.peak_flops,
                mem_bandwidth: m.mem_bandwidth,
                ridge_point: m.ridge_point(),
                samples,
            })
        })
        .collect::<iks_core::Result<Vec<_>>>()?;

    let points = input
        .rows
        .iter()
        .map(|r| {
            let baselines = input
                .baselines
                .iter()
                .map(|(m, eff)| {
                    let t = baseline_time(m, r.corpus_bytes, r.batch, *eff)?;
                    Ok(BaselineEntry {
                        machine: m.name.clone(),
                        efficiency: *eff,
                        time_ns: t.as_ns(),
                        speedup: t.as_ns() / r.latency.total.as_ns(),
                    })
                })
                .collect::<iks_core::Result<Vec<_>>>()?;
            Ok(PointEntry {
                corpus_bytes: r.corpus_bytes,
                batch: r.batch,
                units: r.units,
                k: r.k,
                latency_ns: (&r.latency).into(),
                power_w: r.power.total,
                energy_j: r.power.energy_per_search,
                baselines,
            })
        })
        .collect::<iks_core::Result<Vec<_>>>()?;

    Ok(Report {
        schema: SCHEMA.into(),
        mode: input.mode.into(),
        seed: input.seed,
        power,
        area,
        roofline,
        points,
    })
}

pub fn write_json<W: Write>(mut out: W, report: &Report) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use iks_core::analysis::power_model;
    use iks_core::Nanos;

    fn row(batch: usize) -> LatencyRow {
        let cfg = DeviceConfig::default();
        let l = LatencyBreakdown::new(Nanos(300.0), Nanos::from_ms(45.0), Nanos(700.0), Nanos::from_us(19.0));
        LatencyRow {
            corpus_bytes: 1000,
            batch,
            units: 1,
            k: 32,
            latency: l,
            power: power_model(batch, &cfg, l.dot_product).unwrap(),
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_row_format() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row(1)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert_eq!(
            line,
            "1000,1,1,32,0.300,45.000000,0.700,19.000,45.020000,35.288,1.587960"
        );
    }

    #[test]
    fn report_schema() {
        let cfg = DeviceConfig::default();
        let area = AreaConfig::default();
        let rows = [row(1), row(64)];
        let report = build_report(&ReportInput {
            mode: "analytic",
            seed: 0,
            device: &cfg,
            area: &area,
            batch_sizes: &[1, 64],
            baselines: &[(MachineModel::cpu(), 1.0)],
            rows: &rows,
        })
        .unwrap();
        assert_eq!(report.area.monolithic_channels, 64);
        assert!((report.area.monolithic_mm2 - 1600.0).abs() < 1e-9);
        assert!((report.area.min_die_mm2 - 27.5625).abs() < 1e-12);
        assert_eq!(report.roofline[0].machine, "iks-derived");
        assert_eq!(report.roofline[1].samples[0].bound, "memory");
        assert_eq!(report.points[1].baselines.len(), 1);

        let json = serde_json::to_string(&report).unwrap();
        let at: Vec<usize> = ["schema", "mode", "seed", "power", "area", "roofline", "points"]
            .iter()
            .map(|k| json.find(&format!("\"{k}\":")).unwrap())
            .collect();
        assert!(at.windows(2).all(|w| w[0] < w[1]), "{json}");
    }
}
