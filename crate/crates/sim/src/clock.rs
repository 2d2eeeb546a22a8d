use std::time::Instant;

use iks_core::host::MonotonicClock;
use iks_core::Nanos;

/// Wall clock backed by [`Instant`].
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    origin: Instant,
}

impl StdClock {
    pub fn new() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl MonotonicClock for StdClock {
    fn now(&self) -> Nanos {
        Nanos(self.origin.elapsed().as_nanos() as f64)
    }
}
