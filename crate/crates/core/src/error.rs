use crate::device::{DoorbellState, ProtocolEvent};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector dimension {dim} does not fit the {capacity}-byte query scratchpad")]
    QueryTooLarge { dim: usize, capacity: usize },

    #[error("vector dimension must be at least 1")]
    ZeroDimension,

    #[error("empty query batch")]
    EmptyBatch,

    #[error("batch of {batch} queries exceeds {engines} processing engines")]
    BatchOverflow { batch: usize, engines: usize },

    #[error("corrupted shard: expected {expected} block bytes, found {found}")]
    CorruptedShard { expected: usize, found: usize },

    #[error("capacity exceeded: {required} bytes required, {available} available")]
    CapacityExceeded { required: u64, available: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("protocol violation: {event:?} is illegal in state {state:?}")]
    Protocol {
        state: DoorbellState,
        event: ProtocolEvent,
    },

    #[error("offload context does not match shard on package {package}")]
    ContextMismatch { package: usize },

    #[error("placement conflict on package {package} between tenants {first} and {second}")]
    PlacementConflict {
        package: usize,
        first: u32,
        second: u32,
    },

    #[error("no corpus placed for this search")]
    PlacementMissing,

    #[error("requested K = {requested} exceeds hardware K = {hardware}")]
    KTooLarge { requested: usize, hardware: usize },

    #[error("K must be at least 1")]
    ZeroK,

    #[error("vector id {id} out of range (corpus has {len} vectors)")]
    IdOutOfRange { id: u64, len: u64 },

    #[error("measured aggregation timing requires a clock")]
    ClockRequired,
}
