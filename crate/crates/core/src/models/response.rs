use serde::{Deserialize, Serialize};

use super::{Branch, ConvSlots, Layout, ModelConfig, ModelParams};
use crate::autodiff::sigmoid;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::poly::{chebyshev_values, krawtchouk_values, FilterKind, KrawtchoukShape};

/// Response of one conv layer, `M(λ) = Σ_k P_k(λ̃) W_k`, on a grid of
/// `L_sym` eigenvalues `λ ∈ [0, 2]`.
///
/// `λ̃` is the operator eigenvalue each family sees: `λ − 1` on `L̂` for
/// Chebyshev, `λ/2` on `L_scaled` for Krawtchouk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerResponse {
    pub branch: Branch,
    pub layer: usize,
    pub kind: FilterKind,
    /// Krawtchouk shape `p` at the time of evaluation.
    pub p: Option<f64>,
    pub lambda: Vec<f64>,
    pub lambda_operator: Vec<f64>,
    /// Mean entry of `M(λ)`; affine in `λ` for a degree-1 filter.
    pub mean: Vec<f64>,
    /// Frobenius norm of `M(λ)`: overall gain at that frequency.
    pub norm: Vec<f64>,
}

/// Maps an `L_sym` eigenvalue to the operator of `kind`.
pub fn operator_eigenvalue(kind: FilterKind, lambda: f64) -> f64 {
    match kind {
        FilterKind::Cheb => lambda - 1.0,
        FilterKind::Krawtchouk => 0.5 * lambda,
    }
}

fn layer_response(
    params: &ModelParams,
    slots: &ConvSlots,
    branch: Branch,
    layer: usize,
    lattice: usize,
    grid: &[f64],
) -> Result<LayerResponse> {
    let degree = slots.weights.len() - 1;
    let p = slots.raw_p.map(|s| sigmoid(params.params[s].value.get(0, 0)));
    let shape = p.map(|p| KrawtchoukShape::new(p, lattice)).transpose()?;
    let mut out = LayerResponse {
        branch,
        layer,
        kind: slots.kind,
        p,
        lambda: grid.to_vec(),
        lambda_operator: Vec::with_capacity(grid.len()),
        mean: Vec::with_capacity(grid.len()),
        norm: Vec::with_capacity(grid.len()),
    };
    for &lambda in grid {
        if !(0.0..=2.0).contains(&lambda) {
            return Err(Error::Domain { value: lambda, lo: 0.0, hi: 2.0 });
        }
        let mu = operator_eigenvalue(slots.kind, lambda);
        let basis = match shape {
            None => chebyshev_values(mu, degree),
            Some(s) => krawtchouk_values(lattice as f64 * mu, s, degree),
        };
        let mut m = DenseMatrix::zeros(slots.fan_in, slots.fan_out);
        for (&w, &b) in slots.weights.iter().zip(&basis) {
            m.axpy(b, &params.params[w].value)?;
        }
        out.lambda_operator.push(mu);
        out.mean.push(m.sum() / m.data().len() as f64);
        out.norm.push(m.frobenius_norm());
    }
    Ok(out)
}

/// Responses of every conv layer of the model, in layout order.
pub fn filter_responses(cfg: &ModelConfig, params: &ModelParams, grid: &[f64]) -> Result<Vec<LayerResponse>> {
    let n = cfg.lattice_size();
    let branch_of = |s: &ConvSlots| match s.kind {
        FilterKind::Cheb => Branch::Stab,
        FilterKind::Krawtchouk => Branch::Het,
    };
    let layers: Vec<(&ConvSlots, usize)> = match &params.layout {
        Layout::Single { layer1, layer2 } => vec![(layer1, 1), (layer2, 2)],
        Layout::HybV3 { het1, stab1, het2, stab2, .. } => vec![(het1, 1), (stab1, 1), (het2, 2), (stab2, 2)],
        Layout::HybV4 { het, stab } => vec![(&het.0, 1), (&het.1, 2), (&stab.0, 1), (&stab.1, 2)],
    };
    layers
        .into_iter()
        .map(|(s, layer)| layer_response(params, s, branch_of(s), layer, n, grid))
        .collect()
}
