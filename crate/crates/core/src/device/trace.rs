//! Line-oriented event trace for protocol auditing.
//!
//! One record per line, tab separated, in the fixed order
//! `time_ns actor event state`; times carry three decimals (picoseconds).

use alloc::vec::Vec;
use core::fmt;

use super::{DoorbellState, ProtocolEvent};
use crate::Nanos;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Actor {
    Host,
    Device(usize),
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actor::Host => f.write_str("host"),
            Actor::Device(unit) => write!(f, "device{unit}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Protocol(ProtocolEvent),
    /// Host cache flush of dirty corpus lines.
    Flush,
    /// A search was issued while corpus writes were still unflushed.
    StaleHazard,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Protocol(e) => e.fmt(f),
            TraceEvent::Flush => f.write_str("flush"),
            TraceEvent::StaleHazard => f.write_str("stale_hazard"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    pub time: Nanos,
    pub actor: Actor,
    pub event: TraceEvent,
    /// Doorbell state of the actor's unit after the event.
    pub state: DoorbellState,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.3}\t{}\t{}\t{}",
            self.time.as_ns(),
            self.actor,
            self.event,
            self.state
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventTrace {
    records: Vec<TraceRecord>,
}

impl EventTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn clear(&mut self) {
        self.records.clear();
    }

    pub fn hazards(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records
            .iter()
            .filter(|r| r.event == TraceEvent::StaleHazard)
    }
}

impl fmt::Display for EventTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
