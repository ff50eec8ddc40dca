use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameter: {0}")]
    InvalidMeshParameter(String),

    #[error("cell {0} is degenerate (non-positive area)")]
    DegenerateCell(usize),

    #[error("cell index {index} out of range (mesh has {count} cells)")]
    CellOutOfRange { index: usize, count: usize },

    #[error("point ({x}, {y}) lies outside the domain")]
    PointOutsideDomain { x: f64, y: f64 },

    #[error("mesh text, line {line}: {message}")]
    MeshFormat { line: usize, message: String },

    #[error("weight evaluated at a point of its singular set")]
    SingularEvaluation,

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("cannot parse weight spec `{spec}`: {reason}")]
    WeightParse { spec: String, reason: String },

    #[error("quadrature did not converge: {0}")]
    QuadratureDivergence(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    /// A mathematical admissibility gate refused the configuration.
    #[error("gate refused: {0}")]
    Gate(String),

    /// The mesh does not satisfy a structural hypothesis (e.g. interior edge count).
    #[error("mesh hypothesis violated: {0}")]
    MeshHypothesis(String),

    #[error("unknown exact solution `{0}`")]
    UnknownSolution(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for refusals of a mathematical precondition, as opposed to
    /// computational failures.
    pub fn is_gate(&self) -> bool {
        matches!(self, Error::Gate(_) | Error::MeshHypothesis(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
