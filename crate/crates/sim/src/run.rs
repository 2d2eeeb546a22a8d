//! Executes a scenario and writes its report files.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use iks_core::analysis::{analytic_latency, power_model, CalibratedAggregation};
use iks_core::device::DeviceConfig;
use iks_core::host::{AggregationTiming, IksSystem, SearchRequest};
use iks_core::layout::{unpack_shard, Corpus};
use iks_core::oracle::oracle_enns;

use crate::clock::StdClock;
use crate::report::{build_report, write_csv, write_json, LatencyRow, Report, ReportInput};
use crate::results::{write_jsonl, QueryRecord};
use crate::runner::RayonRunner;
use crate::scenario::{Aggregation, CorpusSource, Mode, Scenario};
use crate::{shard_file, synthetic, SimError, SimResult};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleSummary {
    pub queries_checked: usize,
    /// One line per disagreeing query.
    pub mismatches: Vec<String>,
}

impl OracleSummary {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<LatencyRow>,
    pub report: Report,
    /// Functional mode only.
    pub records: Vec<QueryRecord>,
    /// Trace text, when requested in functional mode.
    pub trace: Option<String>,
    pub oracle: Option<OracleSummary>,
}

impl RunOutput {
    pub fn csv(&self) -> String {
        let mut buf = Vec::new();
        write_csv(&mut buf, &self.rows).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }

    pub fn json(&self) -> String {
        let mut buf = Vec::new();
        write_json(&mut buf, &self.report).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn jsonl(&self) -> String {
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &self.records).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }
}

/// What a run needs beyond the scenario file.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Record the event trace even if the scenario does not ask for one.
    pub trace: bool,
    /// Force the oracle comparison on.
    pub oracle_check: bool,
}

pub fn load_corpus(source: &CorpusSource, budget: u64) -> SimResult<Corpus> {
    match source {
        CorpusSource::Synthetic { n, dim, seed } => Ok(synthetic::corpus(*n, *dim, *seed)?),
        CorpusSource::File(path) => {
            let shard = shard_file::read(path)?;
            let bytes = (shard.n_vectors() * shard.dim() * 2) as u64;
            if bytes > budget {
                return Err(SimError::Scenario(format!(
                    "corpus of {bytes} bytes exceeds the memory budget of {budget}"
                )));
            }
            let vectors = unpack_shard(&shard)?;
            Ok(Corpus::from_vectors(shard.dim(), &vectors)?)
        }
    }
}

pub fn run_scenario(scenario: &Scenario, opts: RunOptions) -> SimResult<RunOutput> {
    scenario.validate()?;
    let cfg = scenario.device_config()?;
    let agg = CalibratedAggregation::default();
    let (rows, records, trace, oracle) = match scenario.mode {
        Mode::Analytic => (analytic_rows(scenario, &cfg, &agg)?, Vec::new(), None, None),
        Mode::Functional => functional(scenario, &cfg, &agg, opts)?,
    };
    let baselines = scenario
        .baselines
        .iter()
        .map(|b| Ok((b.model(&cfg)?, b.efficiency)))
        .collect::<SimResult<Vec<_>>>()?;
    let area = scenario.area.apply();
    let report = build_report(&ReportInput {
        mode: match scenario.mode {
            Mode::Analytic => "analytic",
            Mode::Functional => "functional",
        },
        seed: scenario.seed,
        device: &cfg,
        area: &area,
        batch_sizes: &scenario.workload.batch_sizes,
        baselines: &baselines,
        rows: &rows,
    })?;
    Ok(RunOutput {
        rows,
        report,
        records,
        trace,
        oracle,
    })
}

fn analytic_rows(
    s: &Scenario,
    cfg: &DeviceConfig,
    agg: &CalibratedAggregation,
) -> SimResult<Vec<LatencyRow>> {
    let w = &s.workload;
    let dim = w.dim.expect("validated");
    let mut rows = Vec::new();
    for &corpus_bytes in &w.corpus_bytes {
        for &batch in &w.batch_sizes {
            for &units in &w.units {
                for &k in &w.k_values {
                    let latency = analytic_latency(corpus_bytes, batch, dim, units, cfg, agg)?;
                    rows.push(LatencyRow {
                        corpus_bytes,
                        batch,
                        units,
                        k,
                        latency,
                        power: power_model(batch, cfg, latency.dot_product)?,
                    });
                }
            }
        }
    }
    Ok(rows)
}

type Functional = (Vec<LatencyRow>, Vec<QueryRecord>, Option<String>, Option<OracleSummary>);

fn functional(
    s: &Scenario,
    cfg: &DeviceConfig,
    agg: &CalibratedAggregation,
    opts: RunOptions,
) -> SimResult<Functional> {
    let w = &s.workload;
    let corpus = load_corpus(&s.corpus_source().expect("validated"), s.memory_budget_bytes)?;
    if w.dim.is_some_and(|d| d != corpus.dim()) {
        return Err(SimError::Scenario(format!(
            "workload.dim disagrees with the corpus dimension {}",
            corpus.dim()
        )));
    }
    let check = s.oracle_check || opts.oracle_check;
    let want_trace = s.output.trace.is_some() || opts.trace;
    let clock = StdClock::new();
    let timing = match s.aggregation {
        Aggregation::Calibrated => AggregationTiming::Calibrated(agg),
        Aggregation::Measured => AggregationTiming::Measured(&clock),
    };

    let queries: Vec<_> = w
        .batch_sizes
        .iter()
        .map(|&b| synthetic::queries(b, corpus.dim(), s.seed))
        .collect::<iks_core::Result<_>>()?;
    let mut summary = OracleSummary::default();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut trace = String::new();

    for &units in &w.units {
        let mut system = IksSystem::place(&corpus, units, cfg.clone())?;
        for (batch_queries, &batch) in queries.iter().zip(&w.batch_sizes) {
            let oracle = check.then(|| {
                let kmax = *w.k_values.iter().max().expect("validated");
                oracle_enns(&corpus, batch_queries, kmax)
            });
            for &k in &w.k_values {
                let req = SearchRequest {
                    queries: batch_queries.clone(),
                    k,
                    tenant: 0,
                };
                let out = system.search(&req, timing, &RayonRunner)?;
                rows.push(LatencyRow {
                    corpus_bytes: system.corpus_bytes(),
                    batch,
                    units,
                    k,
                    latency: out.latency,
                    power: power_model(batch, cfg, out.latency.dot_product)?,
                });
                for (q, list) in out.topk.per_query.iter().enumerate() {
                    records.push(QueryRecord::new((batch, units, k), q, list, &out.latency));
                    if let Some(oracle) = &oracle {
                        summary.queries_checked += 1;
                        let want = &oracle[q][..k.min(oracle[q].len())];
                        let same = list.len() == want.len()
                            && list.iter().zip(want).all(|(g, o)| {
                                g.global_id == o.id && g.score.to_bits() == o.score.to_bits()
                            });
                        if !same {
                            summary.mismatches.push(format!(
                                "units {units} batch {batch} K {k} query {q}"
                            ));
                        }
                    }
                }
            }
        }
        if want_trace {
            trace.push_str(&system.take_trace().to_string());
        }
    }
    Ok((
        rows,
        records,
        want_trace.then_some(trace),
        check.then_some(summary),
    ))
}

fn write_file(path: &Path, text: &str) -> SimResult<()> {
    use std::io::Write;
    let f = fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = BufWriter::new(f);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| SimError::io(path, e))
}

/// Writes the report files named by the scenario. `trace_path` overrides
/// the scenario's trace location. Returns the paths written.
pub fn write_outputs(
    scenario: &Scenario,
    out: &RunOutput,
    trace_path: Option<&Path>,
) -> SimResult<Vec<PathBuf>> {
    let o = &scenario.output;
    fs::create_dir_all(&o.dir).map_err(|e| SimError::io(&o.dir, e))?;
    let mut written = Vec::new();
    let mut emit = |path: PathBuf, text: &str| -> SimResult<()> {
        write_file(&path, text)?;
        written.push(path);
        Ok(())
    };
    emit(o.dir.join(&o.latency_csv), &out.csv())?;
    emit(o.dir.join(&o.report_json), &out.json())?;
    if scenario.mode == Mode::Functional {
        emit(o.dir.join(&o.results_jsonl), &out.jsonl())?;
    }
    if let Some(text) = &out.trace {
        let path = match (trace_path, &o.trace) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(name)) => o.dir.join(name),
            (None, None) => o.dir.join("trace.tsv"),
        };
        emit(path, text)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn functional_scenario(extra: &str) -> Scenario {
        Scenario::parse(&format!(
            "mode = \"functional\"\nseed = 3\n{extra}\n[workload]\nbatch_sizes = [1, 4]\n\
             k_values = [1, 5]\nunits = [1, 2]\n[workload.synthetic]\nn = 700\ndim = 16\n"
        ))
        .unwrap()
    }

    #[test]
    fn functional_rows_and_records() {
        let s = functional_scenario("oracle_check = true");
        let out = run_scenario(&s, RunOptions::default()).unwrap();
        assert_eq!(out.rows.len(), 2 * 2 * 2);
        assert_eq!(out.records.len(), 2 * 2 * (1 + 4));
        let oracle = out.oracle.unwrap();
        assert!(oracle.passed(), "{:?}", oracle.mismatches);
        assert_eq!(oracle.queries_checked, out.records.len());
        assert!(out.rows.iter().all(|r| r.corpus_bytes == 700 * 32));
        assert!(out.trace.is_none());
    }

    #[test]
    fn trace_on_request() {
        let s = functional_scenario("");
        let out = run_scenario(&s, RunOptions { trace: true, ..Default::default() }).unwrap();
        let trace = out.trace.unwrap();
        assert!(trace.lines().any(|l| l.contains("ring_doorbell")));
        assert!(trace.lines().any(|l| l.contains("device1")));
    }

    #[test]
    fn analytic_rows_nest_corpus_batch_units_k() {
        let s = Scenario::parse(
            "mode = \"analytic\"\n[workload]\ncorpus_bytes = [1000000, 2000000]\ndim = 64\n\
             batch_sizes = [1, 2]\nunits = [1, 2]\nk_values = [1, 32]\n",
        )
        .unwrap();
        let out = run_scenario(&s, RunOptions::default()).unwrap();
        let keys: Vec<(u64, usize, usize, usize)> = out
            .rows
            .iter()
            .map(|r| (r.corpus_bytes, r.batch, r.units, r.k))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(keys.len(), 16);
    }

    #[test]
    fn capacity_overflow_is_a_model_error() {
        let s = Scenario::parse(
            "mode = \"analytic\"\n[workload]\ncorpus_bytes = [600000000000]\ndim = 768\nbatch_sizes = [1]\n",
        )
        .unwrap();
        let err = run_scenario(&s, RunOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn corpus_file_source() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = synthetic::corpus(150, 8, 5).unwrap();
        let shard = iks_core::layout::pack_shard(8, corpus.iter(), 0).unwrap();
        let path = dir.path().join("c.iks");
        shard_file::write(&path, &shard).unwrap();
        let loaded = load_corpus(&CorpusSource::File(path.clone()), u64::MAX).unwrap();
        assert_eq!(loaded, corpus);
        assert!(load_corpus(&CorpusSource::File(path), 10).is_err());
    }
}
