use rayon::prelude::*;

use iks_core::device::PackageRunner;
use iks_core::layout::{BlockedShard, QueryBatch};
use iks_core::nma::{run_nma_offload, NmaConfig, NmaOffloadResult};

/// Runs the packages of a unit on the rayon pool. Results come back in
/// package order, so output does not depend on the thread count.
#[derive(Clone, Copy, Debug, Default)]
pub struct RayonRunner;

impl PackageRunner for RayonRunner {
    fn run(
        &self,
        shards: &[BlockedShard],
        batch: &QueryBatch,
        cfg: &NmaConfig,
    ) -> iks_core::Result<Vec<NmaOffloadResult>> {
        shards
            .par_iter()
            .map(|s| run_nma_offload(s, batch, cfg))
            .collect()
    }
}
