//! Hybrid-domain spectral graph neural networks.
//!
//! Chebyshev filters on `L̂ = L_sym − I` give a fixed, bounded basis;
//! Krawtchouk filters on `L_scaled = ½ L_sym` learn their shape `p`. The
//! crate builds both, fuses them early (v3) or late (v4), and records every
//! place a non-finite value first appears so the collapse of early fusion
//! at high degree can be reproduced and inspected.

pub mod autodiff;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod models;
pub mod poly;
pub mod trainer;

pub use error::{Error, Result};

/// The guide's chapters, compiled so their snippets run as doctests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/spectral-operators.md")]
    pub struct SpectralOperators;
    #[doc = include_str!("../../../book/src/polynomial-bases.md")]
    pub struct PolynomialBases;
    #[doc = include_str!("../../../book/src/autodiff.md")]
    pub struct Autodiff;
    #[doc = include_str!("../../../book/src/fusion.md")]
    pub struct Fusion;
    #[doc = include_str!("../../../book/src/training.md")]
    pub struct Training;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
