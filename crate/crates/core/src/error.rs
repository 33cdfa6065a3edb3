use thiserror::Error;

/// Errors raised by problem construction, projections, solvers and the
/// experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value {value} from component {component}")]
    Numeric { component: usize, value: f64 },

    #[error("oracle contract violated by component {component}: {detail}")]
    ContractViolation { component: usize, detail: String },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("feasible set appears empty: violation {violation:e} after {sweeps} sweeps")]
    Infeasible { violation: f64, sweeps: usize },

    #[error("point outside oracle domain: {0}")]
    Domain(String),

    /// The quasi-subgradient direction vanished (stationary point of the
    /// component); callers treat the point as component-optimal.
    #[error("degenerate quasi-subgradient direction")]
    DegenerateDirection,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
