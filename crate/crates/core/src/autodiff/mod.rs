//! Minimal reverse-mode differentiation over dense matrices.
//!
//! The operation set is exactly what the spectral models need. Gradient
//! flow follows tape edges and nothing else: a parameter that is not an
//! ancestor of the loss gets no gradient, whatever values (NaN included)
//! live elsewhere on the tape.

mod check;
mod param;
mod tape;

pub use check::{grad_check, numeric_grad};
pub use param::Param;
pub use tape::{sigmoid, Gradients, NodeId, Tape};
