use thiserror::Error;

/// Errors raised by the solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("event y = {target} not reached before x = {x_max}")]
    EventNotReached { target: f64, x_max: f64 },
    #[error("parameter out of validity window: {0}")]
    DomainError(String),
    #[error("vector field vanishes on the leg: {0}")]
    NonMonotone(String),
    #[error("Taylor table has order {available}, need at least {required}")]
    OrderTooLow { available: usize, required: usize },
    #[error("cannot isolate the roots of the partial-fraction cubic: {0}")]
    RootIsolationFailure(String),
    #[error("epsilon grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("no bracket for L = {l}: T(eps0) = {t_at_eps0}")]
    NoBracket { l: f64, t_at_eps0: f64 },
    #[error("trajectory left the center-manifold window at x = {x} (y = {y})")]
    Blowup { x: f64, y: f64 },
    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("singular Jacobian: {0}")]
    SingularJacobian(String),
    #[error("continuation stalled at L = {attempted}; last converged L = {last_good}")]
    ContinuationStall { last_good: f64, attempted: f64 },
    #[error("tracked Floquet exponent collides with another branch at l = {0}")]
    BranchCrossing(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("phase fit ambiguous at x = {0}")]
    FitAmbiguous(f64),
    #[error("family too small: {0}")]
    InsufficientFamily(String),
    #[error("step size underflow at x = {0}")]
    StepSizeUnderflow(f64),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("at {point}: {source}")]
    AtPoint { point: String, source: Box<Error> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Attaches the parameter point at which a solver failed.
    pub fn at(self, point: impl Into<String>) -> Self {
        Error::AtPoint { point: point.into(), source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
