use thiserror::Error;

/// Errors raised by the experiment library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `f(n)` stayed within interval uncertainty of an integer at the last precision rung.
    #[error("floor of f({n}) undecidable at {precision_cap} bits")]
    FloorUndecidable { n: u64, precision_cap: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    /// Work estimate exceeds the configured cap (enumeration is exponential in lambda).
    #[error("cost guard: lambda = {lambda} exceeds cap {cap}")]
    CostGuard { lambda: u32, cap: u32 },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("overflow: {0}")]
    Overflow(String),
}

impl Error {
    /// Validation failures are caused by the caller's input; everything else is internal.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::LengthMismatch { .. } | Error::Invalid(_) | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
