use thiserror::Error;

use crate::expr::ExprError;
use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Lp(#[from] LpError),

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("point {point:?} lies outside the problem box")]
    OutOfBox { point: Vec<f64> },

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid weight vector: {0}")]
    InvalidWeight(String),

    #[error("point {point:?} is infeasible (max constraint value {max_violation:e})")]
    InfeasiblePoint { point: Vec<f64>, max_violation: f64 },

    #[error("degenerate pair: x and xbar coincide (distance {distance:e})")]
    DegeneratePair { distance: f64 },

    #[error("no feasible grid node")]
    EmptyFeasibleSet,

    #[error("invalid grid step {0}")]
    InvalidGridStep(f64),

    #[error("{path}: row {row}, column {column}: {message}")]
    Csv {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}
