use thiserror::Error;

pub type Result<T> = std::result::Result<T, SsamgError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SsamgError {
    #[error("cell {cell:?} is not in any box of part {part}")]
    OutOfGrid { part: usize, cell: [i64; 3] },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dense assembly of {size} rows exceeds the cap of {cap}")]
    DenseCapExceeded { size: usize, cap: usize },

    #[error("stencil of part {part} has no center entry")]
    MissingDiagonal { part: usize },

    #[error("invalid stencil: {0}")]
    InvalidStencil(String),

    #[error("no coarsenable direction")]
    NoDirection,

    #[error("degenerate interpolation row at global index {row}")]
    DegenerateRow { row: usize },

    #[error("singular smoother at row {row}")]
    SingularSmoother { row: usize },

    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },

    #[error("operator is not positive definite (<p, Ap> = {curvature:e} at iteration {iteration})")]
    Indefinite { iteration: usize, curvature: f64 },

    #[error("PCG stagnated at iteration {iteration}")]
    Stagnation { iteration: usize },

    #[error("coarse operator coupling {offset:?} leaves the 27-point envelope")]
    StencilEnvelope { offset: [i64; 3] },

    #[error("singular coarse-grid matrix")]
    SingularCoarse,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SsamgError {
    fn from(e: std::io::Error) -> Self {
        SsamgError::Io(e.to_string())
    }
}
