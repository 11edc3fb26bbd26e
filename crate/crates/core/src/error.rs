use thiserror::Error;

/// Errors raised by the lattice, reduction, bound and experiment routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("singular basis: rows are linearly dependent")]
    SingularBasis,

    #[error("not positive definite: pivot {pivot} is {value}")]
    NotPositiveDefinite { pivot: usize, value: String },

    #[error("not symmetric: entry ({row}, {col}) = {upper} but ({col}, {row}) = {lower}")]
    NotSymmetric {
        row: usize,
        col: usize,
        upper: String,
        lower: String,
    },

    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },

    #[error("empty matrix")]
    Empty,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not unimodular (determinant {det})")]
    NotUnimodular { det: String },

    #[error("index {index} out of range 1..={rank}")]
    IndexOutOfRange { index: usize, rank: usize },

    #[error("minima enumeration unsupported above rank {max} (rank {rank})")]
    RankTooLarge { rank: usize, max: usize },

    #[error("Hermite constant unknown for rank {0}")]
    HermiteConstantUnknown(usize),

    #[error("bound not applicable for rank {rank}: {reason}")]
    BoundNotApplicable { rank: usize, reason: &'static str },

    #[error("exact value conjectural for rank {0}: only a conjectured value gamma_n^n is known")]
    ExactValueConjectural(usize),

    #[error("input is not HKZ reduced: {0}")]
    NotHkzReduced(String),

    #[error("point outside case region: {0}")]
    OutsideRegion(String),

    #[error("invalid grid step {0}: must be positive and divide 1/2")]
    InvalidStep(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("random generator failed to produce a nonsingular matrix after {0} attempts")]
    GeneratorExhausted(usize),

    #[error("bound violated in trial {trial}: {detail}")]
    BoundViolation { trial: usize, detail: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("serialization failed: {0}")]
    Serialize(String),
}

pub type Result<T> = std::result::Result<T, Error>;
