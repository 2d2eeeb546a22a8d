//! JSON-lines search results, one record per query.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use iks_core::analysis::LatencyBreakdown;
use iks_core::host::GlobalEntry;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub score: f32,
    pub global_id: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyNs {
    pub write: f64,
    pub dot: f64,
    pub read: f64,
    pub agg: f64,
    pub total: f64,
}

impl From<&LatencyBreakdown> for LatencyNs {
    fn from(l: &LatencyBreakdown) -> Self {
        Self {
            write: l.write_query.as_ns(),
            dot: l.dot_product.as_ns(),
            read: l.partial_read.as_ns(),
            agg: l.aggregation.as_ns(),
            total: l.total.as_ns(),
        }
    }
}

/// One query of one scenario point. `batch`, `units` and `k` identify the
/// point when a scenario sweeps several.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub batch: usize,
    pub units: usize,
    pub k: usize,
    pub query_index: usize,
    pub entries: Vec<ResultEntry>,
    pub latency_ns: LatencyNs,
}

impl QueryRecord {
    pub fn new(
        (batch, units, k): (usize, usize, usize),
        query_index: usize,
        entries: &[GlobalEntry],
        latency: &LatencyBreakdown,
    ) -> Self {
        Self {
            batch,
            units,
            k,
            query_index,
            entries: entries
                .iter()
                .map(|e| ResultEntry {
                    score: e.score.to_f32(),
                    global_id: e.global_id,
                })
                .collect(),
            latency_ns: latency.into(),
        }
    }
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[QueryRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use iks_core::{f16, Nanos};

    #[test]
    fn record_shape() {
        let lat = LatencyBreakdown::new(Nanos(300.0), Nanos(1000.0), Nanos(700.0), Nanos(19.0));
        let entries = [GlobalEntry {
            score: f16::from_f32(0.5),
            global_id: 42,
        }];
        let r = QueryRecord::new((1, 1, 1), 0, &entries, &lat);
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &[r.clone(), r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            r#"{"batch":1,"units":1,"k":1,"query_index":0,"entries":[{"score":0.5,"global_id":42}],"latency_ns":{"write":300.0,"dot":1000.0,"read":700.0,"agg":19.0,"total":2019.0}}"#
        );
        assert_eq!(text.lines().count(), 2);
        let back: QueryRecord = serde_json::from_str(first).unwrap();
        assert_eq!(back.entries[0].global_id, 42);
    }
}
