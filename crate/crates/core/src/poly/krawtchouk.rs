use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};

use super::{BasisStack, OrderScaling};

/// Shape of a Krawtchouk basis: success probability `p ∈ (0, 1)` and
/// lattice size `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrawtchoukShape {
    pub p: f64,
    pub lattice: usize,
}

impl KrawtchoukShape {
    pub fn new(p: f64, lattice: usize) -> Result<Self> {
        let s = Self { p, lattice };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Config(format!("Krawtchouk p = {} outside (0, 1)", self.p)));
        }
        if self.lattice == 0 {
            return Err(Error::Config("Krawtchouk lattice size must be positive".into()));
        }
        Ok(())
    }

    /// Recurrence coefficients for step `k → k+1` (`1 ≤ k < N`) in the form
    /// `K_{k+1} = K_k + ratio·(K_k − K_{k−1}) − lattice_gain·x̃·K_k`, where
    /// `x̃` is the unscaled operator argument (`x = N·x̃`).
    pub(crate) fn step_coefficients(&self, k: usize) -> (f64, f64) {
        let n = self.lattice as f64;
        let kf = k as f64;
        let a = self.p * (n - kf);
        (kf * (1.0 - self.p) / a, n / a)
    }
}

/// `K_0(x), …, K_K(x)` at a lattice argument `x ∈ [0, N]`.
///
/// Orders past `N − 1` divide by zero and come out non-finite.
pub fn krawtchouk_values(x: f64, shape: KrawtchoukShape, k: usize) -> Vec<f64> {
    let n = shape.lattice as f64;
    let p = shape.p;
    let mut out = Vec::with_capacity(k + 1);
    out.push(1.0);
    if k >= 1 {
        out.push(1.0 - x / (p * n));
    }
    for j in 1..k {
        let jf = j as f64;
        let a = p * (n - jf);
        let b = jf * (1.0 - p);
        let next = ((a + b - x) * out[j] - b * out[j - 1]) / a;
        out.push(next);
    }
    out
}

/// Stack of `K_k(N·L_scaled; p, N)·X` for `k = 0..=K`, unscaled.
pub fn krawtchouk_propagate(
    l_scaled: &CsrMatrix,
    x: &DenseMatrix,
    k: usize,
    shape: KrawtchoukShape,
) -> Result<BasisStack> {
    krawtchouk_propagate_with(l_scaled, x, k, shape, OrderScaling::Raw)
}

/// As [`krawtchouk_propagate`], optionally rescaling each order after the
/// recurrence (the recurrence itself always runs on raw values).
pub fn krawtchouk_propagate_with(
    l_scaled: &CsrMatrix,
    x: &DenseMatrix,
    k: usize,
    shape: KrawtchoukShape,
    scaling: OrderScaling,
) -> Result<BasisStack> {
    shape.validate()?;
    if shape.lattice < k {
        return Err(Error::Config(format!(
            "lattice size {} smaller than degree {k}",
            shape.lattice
        )));
    }
    let mut mats = Vec::with_capacity(k + 1);
    mats.push(x.clone());
    if k >= 1 {
        let mut k1 = x.clone();
        k1.axpy(-1.0 / shape.p, &l_scaled.spmm(x)?)?;
        mats.push(k1);
    }
    for j in 1..k {
        let (ratio, gain) = shape.step_coefficients(j);
        let lk = l_scaled.spmm(&mats[j])?;
        let diff = mats[j].sub(&mats[j - 1])?;
        let mut next = mats[j].clone();
        next.axpy(ratio, &diff)?;
        next.axpy(-gain, &lk)?;
        mats.push(next);
    }
    let stack = BasisStack::from_mats(mats);
    Ok(match scaling {
        OrderScaling::Raw => stack,
        OrderScaling::MaxAbs => {
            let max_abs = stack.max_abs().to_vec();
            let first_bad = stack.first_nonfinite_order();
            let mats = stack
                .mats
                .into_iter()
                .zip(&max_abs)
                .map(|(m, &s)| if s > 0.0 { m.scale(1.0 / s) } else { m })
                .collect();
            BasisStack {
                mats,
                max_abs,
                first_nonfinite_order: first_bad,
            }
        }
    })
}
