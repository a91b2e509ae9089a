use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Parameters or chain specification violate their invariants.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Atom placement violates the minimum-separation floor.
    #[error("geometry error: {0}")]
    Geometry(String),
    /// A caller passed arguments that do not fit together.
    #[error("usage error: {0}")]
    Usage(String),
    /// The requested operation is not defined for this input.
    #[error("unsupported input: {0}")]
    Unsupported(String),
    /// The spectral grid needed to honour the request exceeds the size cap.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// A numerical routine failed or produced non-finite output.
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
