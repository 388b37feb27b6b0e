use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

use super::{NodeId, Tape};

/// Central finite differences of a scalar function of several matrices.
pub fn numeric_grad<F>(params: &[DenseMatrix], eps: f64, f: F) -> Result<Vec<DenseMatrix>>
where
    F: Fn(&[DenseMatrix]) -> Result<f64>,
{
    let mut work = params.to_vec();
    let mut out = Vec::with_capacity(params.len());
    for p in 0..params.len() {
        let mut g = DenseMatrix::zeros(params[p].rows(), params[p].cols());
        for i in 0..params[p].data().len() {
            let orig = work[p].data()[i];
            work[p].data_mut()[i] = orig + eps;
            let up = f(&work)?;
            work[p].data_mut()[i] = orig - eps;
            let down = f(&work)?;
            work[p].data_mut()[i] = orig;
            g.data_mut()[i] = (up - down) / (2.0 * eps);
        }
        out.push(g);
    }
    Ok(out)
}

/// Compares reverse-mode gradients with central differences.
///
/// `build` records a scalar loss on a fresh tape given one parameter leaf
/// per input matrix; it must be deterministic. Returns
/// `max |analytic − numeric| / max(1, |numeric|)` over all entries.
pub fn grad_check<'a, F>(params: &[DenseMatrix], eps: f64, build: F) -> Result<f64>
where
    F: Fn(&mut Tape<'a>, &[NodeId]) -> Result<NodeId>,
{
    let eval = |values: &[DenseMatrix]| -> Result<f64> {
        let mut tape = Tape::new();
        let leaves: Vec<NodeId> = values.iter().enumerate().map(|(i, v)| tape.param_owned(i, v.clone())).collect();
        let loss = build(&mut tape, &leaves)?;
        let v = tape.value(loss).get(0, 0);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("grad_check forward produced {v}")));
        }
        Ok(v)
    };
    eval(params)?;

    let mut tape = Tape::new();
    let leaves: Vec<NodeId> = params.iter().enumerate().map(|(i, v)| tape.param_owned(i, v.clone())).collect();
    let loss = build(&mut tape, &leaves)?;
    let grads = tape.backward(loss)?;
    let numeric = numeric_grad(params, eps, eval)?;

    let mut worst = 0.0f64;
    for (i, num) in numeric.iter().enumerate() {
        let zero = DenseMatrix::zeros(num.rows(), num.cols());
        let ana = grads.param(i).unwrap_or(&zero);
        for (a, n) in ana.data().iter().zip(num.data()) {
            let err = (a - n).abs() / n.abs().max(1.0);
            if err.is_nan() {
                return Err(Error::NonFinite("gradient comparison".into()));
            }
            worst = worst.max(err);
        }
    }
    Ok(worst)
}
