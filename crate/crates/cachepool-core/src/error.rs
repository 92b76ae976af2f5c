//! Crate-wide error type.

/// Errors shared by the workload, simulation, analytic and planner modules.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Specification is structurally invalid (weights do not sum to one,
    /// empty flow list, non-positive parameter, ...).
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// A combination of options the implementation deliberately does not
    /// support (e.g. overlapped data for anything but two flows).
    #[error("unsupported configuration: {0}")]
    UnsupportedConfig(String),

    /// A parameter is outside the mathematical domain of the requested
    /// operation (e.g. a Zipf exponent at or below one).
    #[error("domain error: {0}")]
    Domain(String),

    /// Index or argument outside the valid range of a finite structure.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// The requested cache size holds the entire catalog, so the
    /// characteristic-time equations have no solution.
    #[error("cache size {x} saturates the catalog (total size mass {total})")]
    Saturated { x: f64, total: f64 },

    /// Instance exceeds a hard size cap (exact oracle only).
    #[error("instance too large: {got} items, limit {limit}")]
    TooLarge { got: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
