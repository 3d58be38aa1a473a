use crate::geometry::Point;
use charflow_expr::EvalError;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Error {
    #[error("singular point {p}: D = {d:e}")]
    SingularPoint { p: Point, d: f64 },
    #[error("at {p}: {source}")]
    Domain {
        p: Point,
        #[source]
        source: EvalError,
    },
    #[error("{0}")]
    Mode(String),
    #[error("integration stage left the field's domain near {p} (step {step:e})")]
    StepTooLarge { p: Point, step: f64 },
    #[error("need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("no convergence: last change {last_change:e}")]
    NoConvergence { last_change: f64 },
    #[error("slope bound violated: |integral of H| = {value} >= 1")]
    SlopeBlowup { value: f64 },
    #[error("curve from {q} left the chart ball before reaching the transversal")]
    TransversalMiss { q: Point },
    #[error("curve height {y} at node {index} is not above the baseline")]
    NegativeHeight { index: usize, y: f64 },
    #[error("line search could not stay in the feasible set")]
    LeftFeasibleSet,
    #[error("unknown catalog entry '{0}'")]
    UnknownEntry(String),
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
