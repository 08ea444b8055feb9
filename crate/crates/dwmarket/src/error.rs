/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two vectors that must share the horizon do not.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A device whose constraints cannot be satisfied at all.
    #[error("infeasible device: {0}")]
    InfeasibleDevice(String),

    /// A numerical solver failed to converge or broke down.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// Coordinator/device message exchange violated the protocol.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Scenario validation failures, one locator-prefixed line each.
    #[error("scenario validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    /// An internal consistency check failed; indicates a bug.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
