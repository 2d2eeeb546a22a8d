//! Doorbell protocol between the host runtime and the device.
//!
//! ```text
//! Idle -write_context-> ContextWritten -ring_doorbell-> DoorbellRung
//!   ^                                                        |
//!   |                                                  device_observe
//! consume_results                                            v
//!   |                                                     NmaBusy
//! HostNotified <-notify_host- ResultsWritten <-write_results-+
//! ```

use core::fmt;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DoorbellState {
    #[default]
    Idle,
    ContextWritten,
    DoorbellRung,
    NmaBusy,
    ResultsWritten,
    HostNotified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Owner {
    Host,
    Device,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolEvent {
    /// Host stores queries and descriptors into the context buffers.
    WriteContext,
    /// Host writes the doorbell cache line.
    RingDoorbell,
    /// Device sees the doorbell update and starts the NMAs.
    DeviceObserve,
    /// NMAs finish and results land in the output scratchpads.
    WriteResults,
    /// Device writes the doorbell; the host's monitored wait returns.
    NotifyHost,
    /// Host has read the partial lists.
    ConsumeResults,
}

impl DoorbellState {
    pub const ALL: [DoorbellState; 6] = [
        DoorbellState::Idle,
        DoorbellState::ContextWritten,
        DoorbellState::DoorbellRung,
        DoorbellState::NmaBusy,
        DoorbellState::ResultsWritten,
        DoorbellState::HostNotified,
    ];

    /// Side that may act next.
    pub fn owner(self) -> Owner {
        match self {
            DoorbellState::Idle | DoorbellState::ContextWritten | DoorbellState::HostNotified => {
                Owner::Host
            }
            DoorbellState::DoorbellRung | DoorbellState::NmaBusy | DoorbellState::ResultsWritten => {
                Owner::Device
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DoorbellState::Idle => "Idle",
            DoorbellState::ContextWritten => "ContextWritten",
            DoorbellState::DoorbellRung => "DoorbellRung",
            DoorbellState::NmaBusy => "NmaBusy",
            DoorbellState::ResultsWritten => "ResultsWritten",
            DoorbellState::HostNotified => "HostNotified",
        }
    }
}

impl fmt::Display for DoorbellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl ProtocolEvent {
    pub const ALL: [ProtocolEvent; 6] = [
        ProtocolEvent::WriteContext,
        ProtocolEvent::RingDoorbell,
        ProtocolEvent::DeviceObserve,
        ProtocolEvent::WriteResults,
        ProtocolEvent::NotifyHost,
        ProtocolEvent::ConsumeResults,
    ];

    pub fn actor(self) -> Owner {
        match self {
            ProtocolEvent::WriteContext
            | ProtocolEvent::RingDoorbell
            | ProtocolEvent::ConsumeResults => Owner::Host,
            ProtocolEvent::DeviceObserve | ProtocolEvent::WriteResults | ProtocolEvent::NotifyHost => {
                Owner::Device
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProtocolEvent::WriteContext => "write_context",
            ProtocolEvent::RingDoorbell => "ring_doorbell",
            ProtocolEvent::DeviceObserve => "device_observe",
            ProtocolEvent::WriteResults => "write_results",
            ProtocolEvent::NotifyHost => "notify_host",
            ProtocolEvent::ConsumeResults => "consume_results",
        }
    }
}

impl fmt::Display for ProtocolEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Next state, or a protocol violation.
pub fn step_doorbell(state: DoorbellState, event: ProtocolEvent) -> Result<DoorbellState> {
    use DoorbellState::*;
    use ProtocolEvent::*;
    match (state, event) {
        (Idle, WriteContext) => Ok(ContextWritten),
        (ContextWritten, RingDoorbell) => Ok(DoorbellRung),
        (DoorbellRung, DeviceObserve) => Ok(NmaBusy),
        (NmaBusy, WriteResults) => Ok(ResultsWritten),
        (ResultsWritten, NotifyHost) => Ok(HostNotified),
        (HostNotified, ConsumeResults) => Ok(Idle),
        _ => Err(Error::Protocol { state, event }),
    }
}

/// A doorbell register with its current protocol state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Doorbell {
    state: DoorbellState,
}

impl Doorbell {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> DoorbellState {
        self.state
    }

    pub fn fire(&mut self, event: ProtocolEvent) -> Result<DoorbellState> {
        self.state = step_doorbell(self.state, event)?;
        Ok(self.state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn happy_path() {
        let mut bell = Doorbell::new();
        assert_eq!(
            bell.fire(ProtocolEvent::WriteContext),
            Ok(DoorbellState::ContextWritten)
        );
        assert_eq!(
            bell.fire(ProtocolEvent::RingDoorbell),
            Ok(DoorbellState::DoorbellRung)
        );
        assert_eq!(
            bell.fire(ProtocolEvent::DeviceObserve),
            Ok(DoorbellState::NmaBusy)
        );
    }

    #[test]
    fn ringing_while_busy_is_a_violation() {
        assert_eq!(
            step_doorbell(DoorbellState::NmaBusy, ProtocolEvent::RingDoorbell),
            Err(Error::Protocol {
                state: DoorbellState::NmaBusy,
                event: ProtocolEvent::RingDoorbell
            })
        );
        assert!(step_doorbell(DoorbellState::Idle, ProtocolEvent::RingDoorbell).is_err());
    }

    #[test]
    fn failed_event_leaves_state_unchanged() {
        let mut bell = Doorbell::new();
        assert!(bell.fire(ProtocolEvent::NotifyHost).is_err());
        assert_eq!(bell.state(), DoorbellState::Idle);
    }

    #[test]
    fn legal_events_belong_to_the_owner() {
        for s in DoorbellState::ALL {
            for e in ProtocolEvent::ALL {
                if step_doorbell(s, e).is_ok() {
                    assert_eq!(s.owner(), e.actor(), "{s} {e}");
                }
            }
        }
    }
}
