use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("arrows are not composable: endpoint distance {distance:e} exceeds tolerance {tol:e}")]
    NotComposable { distance: f64, tol: f64 },

    #[error("multi-index of total degree {degree} exceeds cutoff {cutoff}")]
    CutoffExceeded { degree: usize, cutoff: usize },

    #[error("incompatible configurations: {0}")]
    ConfigMismatch(String),

    #[error("fiber modes differ: {left} vs {right}")]
    ModeMismatch { left: i64, right: i64 },

    #[error("quadrature order {order} below required {required}")]
    GridTooCoarse { order: usize, required: usize },

    #[error("quadrature would need {count} nodes, above the cap of {cap}")]
    TooManyNodes { count: u128, cap: usize },

    #[error("character has a pole at t = {t}: degenerate fixed point")]
    PoleAtFixedTime { t: String },

    #[error("|q| = {modulus} is outside the open unit disk")]
    QOutsideDisk { modulus: f64 },

    #[error("degeneracy count overflows u64 at level {level}")]
    SeriesOverflow { level: usize },
}
