use super::ConvSlots;
use crate::autodiff::{NodeId, Param, Tape};
use crate::error::{shape_err, Result};
use crate::linalg::CsrMatrix;
use crate::poly::{BasisStack, FilterKind, OrderScaling};

/// Result of one polynomial conv layer on a tape.
#[derive(Clone, Debug)]
pub struct ConvOutput {
    /// `Σ_k (P_k X) W_k`.
    pub out: NodeId,
    /// The (possibly rescaled) basis terms `P_k X`, one per order.
    pub basis: Vec<NodeId>,
    pub first_nonfinite_order: Option<usize>,
    /// Largest finite magnitude over the orders before the first overflow.
    pub max_abs_before: f64,
}

/// Where a conv layer takes its propagation from.
#[derive(Clone, Copy, Debug)]
pub enum ConvInput<'a> {
    /// A node on the tape, propagated by an in-tape recurrence.
    Node(NodeId),
    /// Chebyshev terms precomputed outside the tape (the input is constant).
    Precomputed(&'a BasisStack),
}

/// Polynomial conv: Chebyshev on `L̂`, Krawtchouk on `L_scaled` with
/// `p = sigmoid(raw_p)` inside the tape so `∂/∂raw_p` flows.
///
/// `operator` must be `L̂` for Chebyshev and `L_scaled` for Krawtchouk.
pub fn conv_forward<'a>(
    tape: &mut Tape<'a>,
    params: &'a [Param],
    slots: &ConvSlots,
    operator: &'a CsrMatrix,
    input: ConvInput<'a>,
    lattice: usize,
    scaling: OrderScaling,
) -> Result<ConvOutput> {
    let degree = slots.weights.len() - 1;
    let basis = match (slots.kind, input) {
        (FilterKind::Cheb, ConvInput::Precomputed(stack)) => {
            if stack.degree() != degree {
                return Err(shape_err(
                    "conv_forward",
                    format!("basis has degree {}, layer has {degree}", stack.degree()),
                ));
            }
            stack.mats().iter().map(|m| tape.constant_ref(m)).collect()
        }
        (FilterKind::Cheb, ConvInput::Node(x)) => cheb_terms(tape, operator, x, degree)?,
        (FilterKind::Krawtchouk, ConvInput::Node(x)) => {
            let raw_p = slots.raw_p.ok_or_else(|| shape_err("conv_forward", "Krawtchouk layer without raw_p"))?;
            let raw_p = tape.param(raw_p, &params[raw_p].value);
            krawtchouk_terms(tape, operator, x, raw_p, degree, lattice)?
        }
        (FilterKind::Krawtchouk, ConvInput::Precomputed(_)) => {
            return Err(shape_err("conv_forward", "Krawtchouk basis depends on p and cannot be precomputed"))
        }
    };

    let probes: Vec<_> = basis.iter().map(|&b| tape.value(b).finite_probe()).collect();
    let first_nonfinite_order = probes.iter().position(|p| !p.is_finite);
    let max_abs_before = probes[..first_nonfinite_order.unwrap_or(probes.len())]
        .iter()
        .map(|p| p.max_abs)
        .fold(0.0, f64::max);

    let basis: Vec<NodeId> = match (slots.kind, scaling) {
        (FilterKind::Krawtchouk, OrderScaling::MaxAbs) => basis
            .into_iter()
            .zip(&probes)
            .map(|(b, p)| {
                if p.is_finite && p.max_abs > 0.0 {
                    tape.scale(b, 1.0 / p.max_abs)
                } else {
                    b
                }
            })
            .collect(),
        _ => basis,
    };

    let mut out: Option<NodeId> = None;
    for (&term, &w) in basis.iter().zip(&slots.weights) {
        let w = tape.param(w, &params[w].value);
        let t = tape.matmul(term, w)?;
        out = Some(match out {
            None => t,
            Some(acc) => tape.add(acc, t)?,
        });
    }
    Ok(ConvOutput {
        out: out.expect("at least one order"),
        basis,
        first_nonfinite_order,
        max_abs_before,
    })
}

fn cheb_terms<'a>(tape: &mut Tape<'a>, l_hat: &'a CsrMatrix, x: NodeId, degree: usize) -> Result<Vec<NodeId>> {
    let mut terms = vec![x];
    if degree >= 1 {
        terms.push(tape.spmm(l_hat, x)?);
    }
    for j in 1..degree {
        let lt = tape.spmm(l_hat, terms[j])?;
        let twice = tape.scale(lt, 2.0);
        terms.push(tape.sub(twice, terms[j - 1])?);
    }
    Ok(terms)
}

/// `K_{j+1} = K_j + ratio·(K_j − K_{j−1}) − gain·L_s K_j` with
/// `ratio = j/(N−j)·(1/p − 1)` and `gain = N/(N−j)·(1/p)`.
fn krawtchouk_terms<'a>(
    tape: &mut Tape<'a>,
    l_s: &'a CsrMatrix,
    x: NodeId,
    raw_p: NodeId,
    degree: usize,
    lattice: usize,
) -> Result<Vec<NodeId>> {
    if lattice < degree {
        return Err(shape_err("conv_forward", format!("lattice {lattice} smaller than degree {degree}")));
    }
    let p = tape.sigmoid(raw_p);
    let inv_p = tape.recip(p);
    let odds = tape.offset(inv_p, -1.0);
    let n = lattice as f64;
    let mut terms = vec![x];
    if degree >= 1 {
        let lx = tape.spmm(l_s, x)?;
        let scaled = tape.mul_scalar(lx, inv_p)?;
        terms.push(tape.sub(x, scaled)?);
    }
    for j in 1..degree {
        let jf = j as f64;
        let ratio = tape.scale(odds, jf / (n - jf));
        let gain = tape.scale(inv_p, n / (n - jf));
        let diff = tape.sub(terms[j], terms[j - 1])?;
        let d = tape.mul_scalar(diff, ratio)?;
        let lk = tape.spmm(l_s, terms[j])?;
        let g = tape.mul_scalar(lk, gain)?;
        let up = tape.add(terms[j], d)?;
        terms.push(tape.sub(up, g)?);
    }
    Ok(terms)
}
