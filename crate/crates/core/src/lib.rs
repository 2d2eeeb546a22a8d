//! Functional and cycle-approximate model of IKS, a CXL type-2 near-memory
//! accelerator for exact nearest-neighbor search over embedding corpora.
//!
//! The crate is `no_std` (with `alloc`). It covers the corpus block layout,
//! the per-package near-memory accelerator (dot-product pipeline and streaming
//! Top-K units), the device-level doorbell protocol and transfer timing, the
//! host runtime with top-K aggregation, and the analytic latency, power, area
//! and roofline models. File formats, wall-clock timing and the CLI live in
//! the `iks-sim` crate.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod device;
mod error;
pub mod host;
pub mod layout;
pub mod nma;
pub mod oracle;
mod units;

pub use half::f16;

pub use error::{Error, Result};
pub use units::{Nanos, GB, GIB};
