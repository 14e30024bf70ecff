use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite integrand value {value} at node {node} (parameter {param})")]
    Evaluation { node: usize, param: f64, value: String },
    #[error("panel {panel}: {source}")]
    Panel { panel: usize, source: Box<Error> },
    #[error("degenerate geometry: {0}")]
    Geometry(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point {0} lies on the branch cut [-1, 1]")]
    BranchCut(String),
    #[error("point {0} lies on the real axis")]
    OnCut(String),
    #[error("remainder function has a pole at {0}")]
    PoleOfRemainder(String),
    #[error("kernel evaluated at its singularity {0}")]
    SingularEvaluation(String),
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("target at distance {distance} exceeds expansion radius {radius}")]
    OutsideConvergenceBall { distance: f64, radius: f64 },
    #[error("target lies on panel {0}")]
    SingularTarget(usize),
    #[error("reference oracle did not converge: last two values {last} and {previous}")]
    OracleFailure { last: String, previous: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn in_panel(self, panel: usize) -> Self {
        Error::Panel { panel, source: Box::new(self) }
    }
}
