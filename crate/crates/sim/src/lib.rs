//! Std companion to `iks-core`: shard files, wall-clock timing, parallel
//! package execution, scenario files, reports and the `iks` CLI.

pub mod clock;
mod error;
pub mod report;
pub mod results;
pub mod run;
pub mod runner;
pub mod scenario;
pub mod shard_file;
pub mod synthetic;

pub use error::{SimError, SimResult};
