use serde::{Deserialize, Serialize};

use super::{chebyshev_values, krawtchouk_values, FilterKind, KrawtchoukShape};
use crate::error::{Error, Result};

/// Lattice size policy for Krawtchouk filters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lattice {
    /// `N = K`, the smallest lattice admitting degree `K`.
    #[default]
    MatchDegree,
    Fixed(usize),
}

impl Lattice {
    pub fn size_for(self, degree: usize) -> usize {
        match self {
            Lattice::MatchDegree => degree.max(1),
            Lattice::Fixed(n) => n,
        }
    }
}

fn check_domain(kind: FilterKind, lambda: f64) -> Result<()> {
    let (lo, hi) = kind.domain();
    if !(lo..=hi).contains(&lambda) {
        return Err(Error::Domain { value: lambda, lo, hi });
    }
    Ok(())
}

/// `g(λ) = Σ_k w_k P_k(λ̃)` on a grid of operator eigenvalues.
///
/// For Krawtchouk the grid is in `L_scaled` units (`[0, 1]`) and mapped to
/// the lattice as `x = N·λ`; `shape` is ignored for Chebyshev.
pub fn scalar_response(
    kind: FilterKind,
    weights: &[f64],
    shape: Option<KrawtchoukShape>,
    grid: &[f64],
) -> Result<Vec<f64>> {
    let degree = weights.len().saturating_sub(1);
    let shape = match kind {
        FilterKind::Cheb => None,
        FilterKind::Krawtchouk => {
            let s = shape.ok_or_else(|| Error::Config("Krawtchouk response needs a shape".into()))?;
            s.validate()?;
            Some(s)
        }
    };
    grid.iter()
        .map(|&lambda| {
            check_domain(kind, lambda)?;
            let basis = match shape {
                None => chebyshev_values(lambda, degree),
                Some(s) => krawtchouk_values(s.lattice as f64 * lambda, s, degree),
            };
            Ok(weights.iter().zip(&basis).map(|(w, b)| w * b).sum())
        })
        .collect()
}

/// Smallest degree `K ≤ cap` whose recurrence produces a non-finite value
/// at eigenvalue `lambda`, scanning `K = 1, 2, …` in order.
///
/// For Krawtchouk the lattice follows `lattice` (so with
/// [`Lattice::MatchDegree`] each candidate degree uses `N = K`).
pub fn overflow_degree(kind: FilterKind, p: f64, lattice: Lattice, lambda: f64, cap: usize) -> Result<Option<usize>> {
    if cap > 200 {
        return Err(Error::Config(format!("overflow scan cap {cap} exceeds 200")));
    }
    check_domain(kind, lambda)?;
    match kind {
        FilterKind::Cheb => Ok(chebyshev_values(lambda, cap)
            .iter()
            .position(|v| !v.is_finite())),
        FilterKind::Krawtchouk => {
            for degree in 1..=cap {
                let n = lattice.size_for(degree);
                let shape = KrawtchoukShape::new(p, n)?;
                let vals = krawtchouk_values(n as f64 * lambda, shape, degree);
                if vals.iter().any(|v| !v.is_finite()) {
                    return Ok(Some(degree));
                }
            }
            Ok(None)
        }
    }
}

/// For each degree `K = 1..=max_degree`: `max_{λ ∈ grid} |P_K(λ)|` (with
/// `N` chosen by `lattice` for Krawtchouk). Non-finite values yield `∞`.
pub fn growth_profile(kind: FilterKind, p: f64, lattice: Lattice, grid: &[f64], max_degree: usize) -> Result<Vec<f64>> {
    for &l in grid {
        check_domain(kind, l)?;
    }
    (1..=max_degree)
        .map(|degree| {
            let mut worst = 0.0f64;
            for &lambda in grid {
                let v = match kind {
                    FilterKind::Cheb => chebyshev_values(lambda, degree)[degree],
                    FilterKind::Krawtchouk => {
                        let n = lattice.size_for(degree);
                        let shape = KrawtchoukShape::new(p, n)?;
                        krawtchouk_values(n as f64 * lambda, shape, degree)[degree]
                    }
                };
                worst = if v.is_finite() { worst.max(v.abs()) } else { f64::INFINITY };
            }
            Ok(worst)
        })
        .collect()
}
