use thiserror::Error;

/// Errors reported by container, tree and iterator operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("index {index} out of range for length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("operation on an empty container")]
    Empty,

    #[error("iterator is positioned at the end")]
    AtEnd,

    #[error("iterator is positioned at the beginning")]
    AtBegin,

    #[error("key not found")]
    KeyNotFound,

    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },

    #[error("allocator cannot be reconfigured while {live} nodes are live")]
    HeapBusy { live: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
