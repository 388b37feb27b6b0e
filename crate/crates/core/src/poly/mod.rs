//! Polynomial propagation bases for the two spectral domains.
//!
//! * Chebyshev on `L̂ = L_sym − I` (spectrum in `[-1, 1]`):
//!   `T_0 = 1`, `T_1 = x`, `T_{k+1} = 2x T_k − T_{k−1}`.
//! * Krawtchouk on `L_scaled = ½ L_sym` (spectrum in `[0, 1]`), evaluated at
//!   the lattice argument `x = N·λ`:
//!   `K_0 = 1`, `K_1 = 1 − x/(pN)`,
//!   `p(N−k) K_{k+1} = [p(N−k) + k(1−p) − x] K_k − k(1−p) K_{k−1}`.
//!
//! Propagation never stops at the first non-finite order. The stack records
//! per-order magnitudes and the first order that overflowed.

mod chebyshev;
mod krawtchouk;
mod response;

use serde::{Deserialize, Serialize};

pub use chebyshev::{cheb_propagate, chebyshev_values};
pub use krawtchouk::{krawtchouk_propagate, krawtchouk_propagate_with, krawtchouk_values, KrawtchoukShape};
pub use response::{growth_profile, overflow_degree, scalar_response, Lattice};

use crate::linalg::DenseMatrix;

/// Which polynomial family a filter uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Cheb,
    Krawtchouk,
}

impl FilterKind {
    /// Eigenvalue interval of the operator this family runs on.
    pub fn domain(self) -> (f64, f64) {
        match self {
            FilterKind::Cheb => (-1.0, 1.0),
            FilterKind::Krawtchouk => (0.0, 1.0),
        }
    }
}

/// How each propagated order is scaled before use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderScaling {
    /// The recurrence output as is.
    #[default]
    Raw,
    /// Each order divided by its own max-abs (when finite and nonzero).
    MaxAbs,
}

/// Propagated terms `P_0·X, …, P_K·X` with overflow instrumentation.
#[derive(Clone, Debug)]
pub struct BasisStack {
    mats: Vec<DenseMatrix>,
    max_abs: Vec<f64>,
    first_nonfinite_order: Option<usize>,
}

impl BasisStack {
    /// Records magnitudes of every order as given.
    pub fn from_mats(mats: Vec<DenseMatrix>) -> Self {
        let probes: Vec<_> = mats.iter().map(DenseMatrix::finite_probe).collect();
        Self {
            first_nonfinite_order: probes.iter().position(|p| !p.is_finite),
            max_abs: probes.iter().map(|p| p.max_abs).collect(),
            mats,
        }
    }

    /// Highest order `K`.
    pub fn degree(&self) -> usize {
        self.mats.len() - 1
    }

    pub fn mats(&self) -> &[DenseMatrix] {
        &self.mats
    }

    pub fn order(&self, k: usize) -> &DenseMatrix {
        &self.mats[k]
    }

    /// Largest finite magnitude of each order.
    pub fn max_abs(&self) -> &[f64] {
        &self.max_abs
    }

    pub fn first_nonfinite_order(&self) -> Option<usize> {
        self.first_nonfinite_order
    }
}
