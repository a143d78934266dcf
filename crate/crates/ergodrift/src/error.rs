use thiserror::Error;

/// Crate-wide error type.
///
/// Domain/parameter violations and internal invariant breaches are kept
/// apart so the CLI can map them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its mathematical domain.
    #[error("parameter domain error: {0}")]
    ParameterDomain(String),

    /// A requested truncation exceeds what the stored data supports.
    #[error("truncation domain error: {0}")]
    TruncationDomain(String),

    /// The kernel cannot be inverted (leading coefficient is zero).
    #[error("non-invertible kernel: {0}")]
    NonInvertible(String),

    /// A guard against combinatorial blow-up was hit.
    #[error("complexity guard: {0}")]
    ComplexityGuard(String),

    /// Not enough data to produce the requested estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The operation's preconditions do not hold for this input.
    #[error("inapplicable: {0}")]
    Inapplicable(String),

    /// A linear map is too ill-conditioned to use.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// A coupling budget was exceeded.
    #[error("budget error: {0}")]
    Budget(String),

    /// Configuration file or flag validation failed.
    #[error("config error: {0}")]
    Config(String),

    /// An internal invariant that should be mathematically impossible to
    /// break was violated; indicates a bug, not a user error.
    #[error("internal invariant breach: {0}")]
    InternalInvariant(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for parameter/domain/config
    /// problems, 3 for internal invariant breaches.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InternalInvariant(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
