//! Exact linear algebra over [`Field`](crate::gf::Field): dense matrices for
//! small verification work and CSR matrices for large block codes.

mod mat;
pub mod sparse;

use thiserror::Error;

use crate::gf::GfError;

pub use mat::{Mat, Solution};
pub use sparse::{Echelon, SparseMat, SparseRow};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("matrix of shape {0:?} is not square")]
    NotSquare((usize, usize)),
    #[error("matrix is singular")]
    Singular,
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("no operands")]
    Empty,
    #[error("serialized matrix is truncated")]
    Truncated,
    #[error(transparent)]
    Field(#[from] GfError),
}
