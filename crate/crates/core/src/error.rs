use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("shape does not fit: {0}")]
    ShapeDoesNotFit(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("subset budget exceeded: {count} subsets needed, cap is {cap}")]
    BudgetExceeded { count: u128, cap: u128 },
    #[error("matrix has odd dimension {0}")]
    OddDimension(usize),
    #[error("matrix is not antisymmetric (deviation {0:e})")]
    NotAntisymmetric(f64),
    #[error("dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("lattice too small for order {order}: need N >= {need}, got {n}")]
    LatticeTooSmall { n: usize, order: usize, need: usize },
    #[error("flow limit does not vanish for word {word} at order {order}")]
    NonVanishingLimit { word: String, order: usize },
    #[error("channel fit has nonzero residual on geometries {geometries}")]
    NonzeroResidual { geometries: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("numerical check failed: {0}")]
    Numerical(String),
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
