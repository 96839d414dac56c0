use thiserror::Error;

use crate::keymix::Tsc48;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid key length {0}")]
    InvalidKeyLength(usize),
    #[error("malformed frame: {0}")]
    MalformedFrame(String),
    #[error("replayed TSC {0}")]
    ReplayDetected(Tsc48),
    #[error("ICV mismatch")]
    IcvMismatch,
    #[error("MIC failure")]
    MicFailure,
    #[error("subsequent-format frame without an established IV_H epoch")]
    EpochMismatch,
    #[error("TSC space exhausted")]
    TscExhausted,
    #[error("countermeasure blackout until t={until_ms} ms")]
    Blackout { until_ms: u64 },
    #[error("reserved flag bits set in {0:#04x}")]
    ReservedBitsSet(u8),
    #[error("missing fragment {0}")]
    MissingFragment(u8),
    #[error("duplicate fragment {0}")]
    DuplicateFragment(u8),
    #[error("precomputed seed queue full")]
    QueueFull,
    #[error("invalid fragment size {0} (minimum 16)")]
    InvalidFragmentSize(usize),
    #[error("frame scheme {found} does not match association scheme {expected}")]
    SchemeMismatch { expected: String, found: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid hex: {0}")]
    InvalidHex(String),
}

impl Error {
    /// True for the errors that count as integrity failures (ICV or MIC).
    pub fn is_integrity(&self) -> bool {
        matches!(self, Error::IcvMismatch | Error::MicFailure)
    }
}
