//! Dense and sparse matrix primitives, the symmetric eigensolver and
//! finite-value probes.

mod csr;
mod dense;
mod eigen;

pub use csr::CsrMatrix;
pub use dense::{finite_probe, DenseMatrix, FiniteProbe};
pub use eigen::{
    jacobi_eigh, jacobi_eigh_dense, jacobi_eigh_dense_with, jacobi_eigh_with, max_residual, Eigen,
    EighOptions,
};
