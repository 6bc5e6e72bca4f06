use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not orthogonal (deviation {deviation:.3e})")]
    NotOrthogonal { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("group closure exceeded {max_order} elements")]
    ClosureOverflow { max_order: usize },

    #[error("unknown catalog group `{0}`")]
    UnknownName(String),

    #[error("bad catalog parameter: {0}")]
    BadParameter(String),

    #[error("element set is not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("subgroup is not an isotropy subgroup of any point")]
    NotIsotropy,

    #[error("stratum has no point of the requested type")]
    EmptyStratum,

    #[error("configuration is not symmetric under generator {generator}")]
    NotSymmetric { generator: usize },

    #[error("collision: bodies {i} and {j} at distance {distance:.3e}")]
    CollisionSingularity { i: usize, j: usize, distance: f64 },

    #[error("size mismatch: {0} vs {1} bodies")]
    SizeMismatch(usize, usize),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid ansatz: {0}")]
    InvalidAnsatz(String),

    #[error("lifted orbits collide (bodies {i} and {j})")]
    OrbitCollision { i: usize, j: usize },

    #[error("slot {slot} left its stratum component")]
    StratumViolation { slot: usize },

    #[error("reduced point has zero moment of inertia")]
    ZeroInertia,

    #[error("no start converged ({starts} starts, {failures} failures)")]
    NoConvergence { starts: usize, failures: usize },

    #[error("continuation lost at step {step} (mass {mass})")]
    ContinuationLost { step: usize, mass: f64 },

    #[error("target spectrum is infeasible (best spectrum error {best:.3e})")]
    InfeasibleSpectrum { best: f64 },

    #[error("collision during integration at t = {time}")]
    CollisionAbort { time: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
