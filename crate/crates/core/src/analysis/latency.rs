use alloc::vec::Vec;

use super::LatencyBreakdown;
use crate::device::DeviceConfig;
use crate::layout::{plan_shards, ELEMENT_BYTES, MAX_DIM};
use crate::nma::nma_time;
use crate::{Error, Nanos, Result, GB};

/// A measured aggregation time for a single-unit search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggregationPoint {
    pub corpus_bytes: u64,
    pub batch: usize,
    pub time: Nanos,
}

/// Host aggregation cost: exact table lookups for calibrated single-unit
/// points, otherwise affine in the number of partial entries merged.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibratedAggregation {
    pub points: Vec<AggregationPoint>,
    pub base: Nanos,
    pub per_entry: Nanos,
}

impl Default for CalibratedAggregation {
    fn default() -> Self {
        let point = |gb: u64, batch, us| AggregationPoint {
            corpus_bytes: gb * GB,
            batch,
            time: Nanos::from_us(us),
        };
        // 8 packages x 32 entries per query: 256 entries at batch 1 and
        // 16384 at batch 64, with the two corpus sizes averaged.
        let (small, large) = ((256.0, 21.0), (16_384.0, 465.0));
        let per_entry = (large.1 - small.1) / (large.0 - small.0);
        Self {
            points: alloc::vec![
                point(50, 1, 19.0),
                point(50, 64, 540.0),
                point(512, 1, 23.0),
                point(512, 64, 390.0),
            ],
            base: Nanos::from_us(small.1 - small.0 * per_entry),
            per_entry: Nanos::from_us(per_entry),
        }
    }
}

impl CalibratedAggregation {
    pub fn time(&self, corpus_bytes: u64, batch: usize, units: usize, entries: u64) -> Nanos {
        if units == 1 {
            if let Some(p) = self
                .points
                .iter()
                .find(|p| p.corpus_bytes == corpus_bytes && p.batch == batch)
            {
                return p.time;
            }
        }
        self.base + self.per_entry * entries as f64
    }
}

fn check_shape(batch: usize, dim: usize, units: usize, cfg: &DeviceConfig) -> Result<()> {
    cfg.validate()?;
    if batch == 0 {
        return Err(Error::EmptyBatch);
    }
    if batch > cfg.nma.engines {
        return Err(Error::BatchOverflow {
            batch,
            engines: cfg.nma.engines,
        });
    }
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if dim > MAX_DIM {
        return Err(Error::QueryTooLarge {
            dim,
            capacity: MAX_DIM * ELEMENT_BYTES,
        });
    }
    if units == 0 {
        return Err(Error::InvalidConfig("units must be at least 1"));
    }
    Ok(())
}

fn assemble(
    corpus_bytes: u64,
    batch: usize,
    dim: usize,
    units: usize,
    dot_product: Nanos,
    cfg: &DeviceConfig,
    aggregation: &CalibratedAggregation,
) -> LatencyBreakdown {
    let write = cfg.context_write_time((batch * dim * ELEMENT_BYTES) as u64);
    let read = cfg.partial_read_time(batch) * units as f64;
    let entries = (units * cfg.packages_per_unit * batch * cfg.nma.hw_k) as u64;
    let agg = aggregation.time(corpus_bytes, batch, units, entries);
    LatencyBreakdown::new(write, dot_product, read, agg)
}

/// Bandwidth-bound latency of a corpus spread evenly over `units` units.
pub fn analytic_latency(
    corpus_bytes: u64,
    batch: usize,
    dim: usize,
    units: usize,
    cfg: &DeviceConfig,
    aggregation: &CalibratedAggregation,
) -> Result<LatencyBreakdown> {
    check_shape(batch, dim, units, cfg)?;
    let available = cfg.unit_capacity_bytes() * units as u64;
    if corpus_bytes > available {
        return Err(Error::CapacityExceeded {
            required: corpus_bytes,
            available,
        });
    }
    let per_package = corpus_bytes as f64 / (units * cfg.packages_per_unit) as f64;
    let dot = Nanos::for_bytes(per_package, cfg.package_bandwidth);
    Ok(assemble(corpus_bytes, batch, dim, units, dot, cfg, aggregation))
}

/// Like [`analytic_latency`] for a known vector count, with the dot-product
/// phase counted in whole blocks on the largest shard.
pub fn analytic_latency_for_vectors(
    n_vectors: u64,
    batch: usize,
    dim: usize,
    units: usize,
    cfg: &DeviceConfig,
    aggregation: &CalibratedAggregation,
) -> Result<LatencyBreakdown> {
    check_shape(batch, dim, units, cfg)?;
    let spans = plan_shards(
        n_vectors,
        dim,
        units,
        cfg.packages_per_unit,
        cfg.package_capacity_bytes,
    )?;
    let largest = spans.iter().map(|s| s.len).max().unwrap_or(0);
    let dot = nma_time(largest, dim, &cfg.nma);
    let corpus_bytes = n_vectors * (dim * ELEMENT_BYTES) as u64;
    Ok(assemble(corpus_bytes, batch, dim, units, dot, cfg, aggregation))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn dot_product_phase() {
        let cfg = DeviceConfig::default();
        let agg = CalibratedAggregation::default();
        let l = analytic_latency(50 * GB, 1, 768, 1, &cfg, &agg).unwrap();
        assert!(rel(l.dot_product.as_ms(), 45.96) < 1e-3);
        let l = analytic_latency(512 * GB, 1, 768, 1, &cfg, &agg).unwrap();
        assert!(rel(l.dot_product.as_ms(), 470.6) < 1e-3);
        let l4 = analytic_latency(512 * GB, 1, 768, 4, &cfg, &agg).unwrap();
        assert!(rel(l4.dot_product.as_ms(), 470.588 / 4.0) < 1e-4);
    }

    #[test]
    fn block_counted_phase_is_close_to_bandwidth_bound() {
        let cfg = DeviceConfig::default();
        let agg = CalibratedAggregation::default();
        let n = 50 * GB / 1536;
        let blocks = analytic_latency_for_vectors(n, 1, 768, 1, &cfg, &agg).unwrap();
        let bw = analytic_latency(50 * GB, 1, 768, 1, &cfg, &agg).unwrap();
        assert!(blocks.dot_product >= bw.dot_product);
        assert!(rel(blocks.dot_product.as_ns(), bw.dot_product.as_ns()) < 1e-4);
    }

    #[test]
    fn totals_with_calibrated_aggregation() {
        let cfg = DeviceConfig::default();
        let agg = CalibratedAggregation::default();
        let a = analytic_latency(50 * GB, 1, 768, 1, &cfg, &agg).unwrap();
        assert_eq!(a.aggregation, Nanos::from_us(19.0));
        assert!(rel(a.total.as_ms(), 46.0) < 0.02);
        let b = analytic_latency(512 * GB, 64, 768, 1, &cfg, &agg).unwrap();
        assert_eq!(b.aggregation, Nanos::from_us(390.0));
        assert!(rel(b.total.as_ms(), 471.0) < 0.02);
    }

    #[test]
    fn affine_fallback_passes_through_averages() {
        let agg = CalibratedAggregation::default();
        assert!(rel(agg.time(1, 1, 1, 256).as_us(), 21.0) < 1e-12);
        assert!(rel(agg.time(1, 64, 1, 16_384).as_us(), 465.0) < 1e-12);
        // table points only apply to single-unit searches
        assert_ne!(agg.time(50 * GB, 1, 4, 1024), Nanos::from_us(19.0));
    }

    #[test]
    fn capacity_and_shape_errors() {
        let cfg = DeviceConfig::default();
        let agg = CalibratedAggregation::default();
        assert!(matches!(
            analytic_latency(cfg.unit_capacity_bytes() + 1, 1, 768, 1, &cfg, &agg),
            Err(Error::CapacityExceeded { .. })
        ));
        assert!(analytic_latency(GB, 0, 768, 1, &cfg, &agg).is_err());
        assert!(analytic_latency(GB, 65, 768, 1, &cfg, &agg).is_err());
        assert!(analytic_latency(GB, 1, 2048, 1, &cfg, &agg).is_err());
        assert!(analytic_latency(GB, 1, 768, 0, &cfg, &agg).is_err());
        assert!(analytic_latency(2 * 1000 * GB, 1, 768, 4, &cfg, &agg).is_ok());
    }
}
