use thiserror::Error;

use crate::mmspace::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: no path between nodes {from} and {to}")]
    DisconnectedGraph { from: usize, to: usize },
    #[error("edge ({from}, {to}) has non-positive weight {weight}")]
    NonPositiveWeight { from: usize, to: usize, weight: f64 },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("duplicate undirected edge ({from}, {to})")]
    DuplicateEdge { from: usize, to: usize },
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("distance matrix is not a metric: {0}")]
    InvalidMetric(Box<ValidationReport>),
    #[error("empty space: at least one point is required")]
    EmptySpace,
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("measure has no positive mass")]
    AllZeroMass,
    #[error("negative mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("weights sum to {0}, expected 1")]
    NotNormalized(f64),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("observable is not centered: mean {0:e}")]
    NotCentered(f64),
    #[error("edges mode requires the source graph")]
    ModeMismatch,

    #[error("linear program is unbounded")]
    Unbounded,
    #[error("linear program is infeasible (phase-one residual {0:e})")]
    Infeasible(f64),
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("singular basis during refactorization")]
    SingularBasis,

    #[error("best variance {0:e} is below the variance floor")]
    DegenerateVariance(f64),
    #[error("solver returned an observable violating the Lipschitz bound by {0:e}")]
    LipschitzViolation(f64),
    #[error("brute-force oracle supports at most {max} points, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("requested {requested} observables, only {available} available")]
    NotEnoughObservables { requested: usize, available: usize },
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("observable {0} has zero μ-norm")]
    ZeroNormObservable(usize),
    #[error("extension needs at least one sample point")]
    EmptySample,

    #[error("observable {index} is not 1-Lipschitz (violation {violation:e})")]
    UncertifiedObservable { index: usize, violation: f64 },
    #[error("missing distance between {a} and {b}")]
    MissingDistance { a: usize, b: usize },
    #[error("correspondence does not cover {side} index {index}")]
    NotSurjective { side: &'static str, index: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
