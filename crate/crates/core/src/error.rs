use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("edge `{edge}` refers to unknown vertex `{vertex}`")]
    DanglingVertex { edge: String, vertex: String },
    #[error("malformed graph: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KTheoryError {
    #[error("graph has sinks; the class of the unit is not defined on this presentation")]
    HasSinks,
    #[error("matrix must be square and nonnegative")]
    NotNonnegativeSquare,
    #[error("vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShiftError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shift equivalence fails: {0}")]
    Verification(String),
    #[error("lag must be at least 1")]
    ZeroLag,
    #[error("chain of elementary equivalences does not compose: {0}")]
    BrokenChain(String),
    #[error("no unital normalization found with k <= {0}")]
    NormalizationBound(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("invalid partition at `{vertex}`: {reason}")]
    InvalidPartition { vertex: String, reason: String },
    #[error("vertices `{0}` and `{1}` cannot be amalgamated in this direction")]
    NotMergeable(String, String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("level {level} has a block of {size} paths, above the guard of {guard}")]
    GuardExceeded { level: usize, size: usize, guard: usize },
    #[error("elements live at different levels or graphs")]
    LevelMismatch,
    #[error("path is not a matrix-unit key at this level")]
    UnknownPath,
    #[error("image of a diagonal unit is not an idempotent with integral trace")]
    NotIdempotent,
    #[error("malformed homomorphism table: {0}")]
    MalformedTable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("graph `{0}` is not essential")]
    NotEssential(&'static str),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error("lift requires m >= 1")]
    ZeroShift,
    #[error("unitality fails at row {row}: (S 1)_j = {lhs}, (B^m 1)_j = {rhs}")]
    NotUnital { row: usize, lhs: String, rhs: String },
    #[error("cardinality mismatch for w_{row}: expected {expected} paths, found {actual}")]
    CardinalityMismatch { row: usize, expected: String, actual: usize },
    #[error("chosen edge for vertex {0} does not end there")]
    BadChosenEdge(usize),
    #[error("adjacency matrix of `{0}` does not match the shift equivalence")]
    MatrixMismatch(&'static str),
    #[error("partition tables are inconsistent: {0}")]
    Partition(String),
    #[error("level {level} is not available; extend the tables first")]
    MissingLevel { level: usize },
    #[error(transparent)]
    Tower(#[from] TowerError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpaError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("element is not homogeneous of degree 0")]
    NotDegreeZero,
    #[error("element is not invertible")]
    NotInvertible,
    #[error("z does not commute with u v u^-1 for vertex `{0}`")]
    NotCommuting(String),
    #[error("graph has sources")]
    HasSources,
    #[error("graph has sinks")]
    HasSinks,
    #[error("conjugation identity fails on the unit {0}")]
    ConjugationFailure(String),
    #[error("recovered data does not reproduce the image of generator {0}")]
    GeneratorMismatch(String),
    #[error("missing image for generator {0}")]
    MissingImage(String),
    #[error(transparent)]
    Tower(#[from] TowerError),
}
