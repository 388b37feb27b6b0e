use crate::error::Result;
use crate::linalg::{CsrMatrix, DenseMatrix};

use super::BasisStack;

/// `T_0(x), …, T_K(x)` by the three-term recurrence.
pub fn chebyshev_values(x: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(1.0);
    if k >= 1 {
        out.push(x);
    }
    for j in 1..k {
        let next = 2.0 * x * out[j] - out[j - 1];
        out.push(next);
    }
    out
}

/// Stack of `T_k(L̂)·X` for `k = 0..=K`.
pub fn cheb_propagate(l_hat: &CsrMatrix, x: &DenseMatrix, k: usize) -> Result<BasisStack> {
    let mut mats = Vec::with_capacity(k + 1);
    mats.push(x.clone());
    if k >= 1 {
        mats.push(l_hat.spmm(x)?);
    }
    for j in 1..k {
        let mut next = l_hat.spmm(&mats[j])?.scale(2.0);
        next.axpy(-1.0, &mats[j - 1])?;
        mats.push(next);
    }
    Ok(BasisStack::from_mats(mats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{l_hat, sym_laplacian};

    #[test]
    fn degree_one_is_x_and_lx() {
        let adj = CsrMatrix::from_triplets(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let lh = l_hat(&sym_laplacian(&adj).unwrap());
        let x = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let s = cheb_propagate(&lh, &x, 1).unwrap();
        assert_eq!(s.mats().len(), 2);
        assert_eq!(s.order(0), &x);
        assert_eq!(s.order(1), &lh.spmm(&x).unwrap());
    }

    #[test]
    fn single_node_cycles() {
        // one isolated node: L̂ = [0]
        let lh = l_hat(&sym_laplacian(&CsrMatrix::from_triplets(1, []).unwrap()).unwrap());
        let x = DenseMatrix::from_rows(&[[2.0, -1.0]]);
        let s = cheb_propagate(&lh, &x, 5).unwrap();
        let expect = [1.0, 0.0, -1.0, 0.0, 1.0, 0.0];
        for (k, &c) in expect.iter().enumerate() {
            assert_eq!(s.order(k), &x.scale(c), "order {k}");
        }
        assert_eq!(s.first_nonfinite_order(), None);
    }

    #[test]
    fn scalar_values_match_cosine_form() {
        let v = chebyshev_values(0.5, 3);
        assert!((v[2] + 0.5).abs() < 1e-15);
        assert!((v[3] + 1.0).abs() < 1e-15);
        for k in 0..20 {
            let x: f64 = 0.3;
            let want = (k as f64 * x.acos()).cos();
            assert!((chebyshev_values(x, k)[k] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_operator_gives_scalar_values() {
        let lh = CsrMatrix::from_triplets(1, [(0, 0, 0.5)]).unwrap();
        let s = cheb_propagate(&lh, &DenseMatrix::scalar(1.0), 3).unwrap();
        assert!((s.order(2).get(0, 0) + 0.5).abs() < 1e-15);
        assert!((s.order(3).get(0, 0) + 1.0).abs() < 1e-15);
    }
}
