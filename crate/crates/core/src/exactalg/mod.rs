//! Exact arithmetic over ℚ: scalars, monomials and polynomials in named
//! parameters, linear algebra, monomial syzygies and fiber dimensions.

pub mod fiber;
pub mod linalg;
mod monomial;
mod poly;
mod scalar;
pub mod syzygy;

pub use fiber::{FiberDim, PointAssignment, PrimeSequence, DEFAULT_DEGREE_BOUND};
pub use linalg::{kernel_basis, matrix_rank, matrix_rank_mod_p, ScalarMatrix};
pub use monomial::Monomial;
pub use poly::{PolyMatrix, Polynomial};
pub use scalar::Scalar;
pub use syzygy::{monomial_syzygies, truncated_kernel_dim};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgError {
    #[error("no value assigned to parameter `{0}`")]
    MissingValue(String),
    #[error("row entry {0} is zero")]
    ZeroEntry(usize),
    #[error("`{0}` is not a single monomial term")]
    NotMonomial(String),
    #[error("`{0}` is not homogeneous")]
    NotHomogeneous(String),
    #[error("generator vectors have different lengths")]
    ShapeMismatch,
    #[error("fiber dimension did not stabilize at degree bound {bound}")]
    NotStabilized { bound: u32 },
    #[error("generic rank disagrees between prime sequences: {primary} vs {secondary}")]
    PrimeDisagreement { primary: usize, secondary: usize },
}
