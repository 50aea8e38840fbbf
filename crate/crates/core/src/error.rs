use thiserror::Error;

pub type Result<T> = std::result::Result<T, HhoError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HhoError {
    #[error("cells {first} and {second} violate conformity: {reason}")]
    NonConforming {
        first: usize,
        second: usize,
        reason: String,
    },

    #[error("invalid mesh input: {0}")]
    InvalidMesh(String),

    #[error("quadrature degree {requested} exceeds the maximum supported degree {max}")]
    QuadratureDegree { requested: usize, max: usize },

    #[error("derivative order {order} is not supported (maximum 4)")]
    UnsupportedDerivativeOrder { order: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("reconstruction system of cell {cell} is singular")]
    SingularReconstruction { cell: usize },

    #[error("matrix is not symmetric positive definite ({context})")]
    NotPositiveDefinite { context: String },

    #[error("layout does not match mesh: {0}")]
    LayoutMismatch(String),

    #[error("requested {requested} eigenpairs but only {available} are available")]
    EigenCount { requested: usize, available: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    EigenConvergence { iterations: usize, residual: f64 },
}
