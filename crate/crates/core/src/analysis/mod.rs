//! Analytic models: latency breakdown, power, area, roofline and parametric
//! baselines.

mod area;
mod latency;
mod power;
mod roofline;

pub use area::{area_model, monolithic_area, square_die_area, AreaConfig, AreaReport};
pub use latency::{
    analytic_latency, analytic_latency_for_vectors, AggregationPoint, CalibratedAggregation,
};
pub use power::{dram_energy, power_model, scratchpad_energy, EnergyModel, PowerReport};
pub use roofline::{
    arithmetic_intensity, baseline_time, roofline, Bound, MachineModel, RooflinePoint,
};

use crate::Nanos;

/// Per-phase retrieval time of one search.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LatencyBreakdown {
    pub write_query: Nanos,
    pub dot_product: Nanos,
    pub partial_read: Nanos,
    pub aggregation: Nanos,
    pub total: Nanos,
}

impl LatencyBreakdown {
    pub fn new(write_query: Nanos, dot_product: Nanos, partial_read: Nanos, aggregation: Nanos) -> Self {
        Self {
            write_query,
            dot_product,
            partial_read,
            aggregation,
            total: write_query + dot_product + partial_read + aggregation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_is_sum_of_phases() {
        let l = LatencyBreakdown::new(Nanos(0.1), Nanos(0.2), Nanos(0.3), Nanos(0.4));
        assert_eq!(l.total, Nanos(0.1) + Nanos(0.2) + Nanos(0.3) + Nanos(0.4));
    }
}
