use thiserror::Error;

/// Errors raised by the lattice, passage, geodesic, statistics and
/// experiment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LppError {
    /// A coordinate, level or index fell outside the admissible range.
    #[error("range error: {0}")]
    Range(String),

    /// Two points that must satisfy `u ⪯ v` do not.
    #[error("order error: {0}")]
    Order(String),

    /// A full-grid computation would exceed the configured cell budget.
    #[error("capacity error: {cells} cells exceeds the full-grid budget of {budget}; use a wavefront or checkpointed surface")]
    Capacity { cells: u64, budget: u64 },

    /// A constrained query had an endpoint outside its region.
    #[error("admissibility error: {0}")]
    Admissibility(String),

    /// Caller broke an API contract (dimension mismatch, empty input, ...).
    #[error("contract error: {0}")]
    Contract(String),

    /// A statistic is undefined for the data (zero variance, too few samples).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Experiment configuration failed validation.
    #[error("{0}")]
    Config(String),
}

pub type Result<T, E = LppError> = std::result::Result<T, E>;
