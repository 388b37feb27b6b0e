use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

use super::Graph;

/// `L_sym = I − D^{-1/2} A D^{-1/2}`.
///
/// Isolated nodes keep a diagonal entry of 1. Each off-diagonal entry is
/// computed as `a_ij · (d_min^{-1/2} · d_max^{-1/2})` with the factors in
/// index order, so the result is bitwise symmetric.
pub fn sym_laplacian(adjacency: &CsrMatrix) -> Result<CsrMatrix> {
    if let Some((i, j, gap)) = adjacency.asymmetry() {
        return Err(Error::NotSymmetric { i, j, gap });
    }
    let n = adjacency.n();
    let inv_sqrt_deg: Vec<f64> = (0..n)
        .map(|r| {
            let d: f64 = adjacency.row(r).map(|(_, v)| v).sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut triplets = Vec::with_capacity(adjacency.nnz() + n);
    for r in 0..n {
        triplets.push((r, r, 1.0));
        for (c, a) in adjacency.row(r) {
            if c == r {
                return Err(Error::Config(format!("self-loop at node {r}")));
            }
            let (lo, hi) = if r < c { (r, c) } else { (c, r) };
            triplets.push((r, c, -(a * (inv_sqrt_deg[lo] * inv_sqrt_deg[hi]))));
        }
    }
    CsrMatrix::from_triplets(n, triplets)
}

/// `L̂ = L_sym − I`, spectrum in `[-1, 1]`.
pub fn l_hat(l_sym: &CsrMatrix) -> CsrMatrix {
    l_sym.shift_diagonal(-1.0)
}

/// `0.5 · L_sym`, spectrum in `[0, 1]`.
pub fn l_scaled(l_sym: &CsrMatrix) -> CsrMatrix {
    l_sym.scale(0.5)
}

/// The shared base operator and both filter domains for one graph.
#[derive(Clone, Debug)]
pub struct SpectralOperators {
    pub l_sym: CsrMatrix,
    pub l_hat: CsrMatrix,
    pub l_scaled: CsrMatrix,
}

impl SpectralOperators {
    pub fn new(adjacency: &CsrMatrix) -> Result<Self> {
        let l_sym = sym_laplacian(adjacency)?;
        Ok(Self {
            l_hat: l_hat(&l_sym),
            l_scaled: l_scaled(&l_sym),
            l_sym,
        })
    }

    pub fn for_graph(g: &Graph) -> Result<Self> {
        Self::new(g.adjacency())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{jacobi_eigh, DenseMatrix};

    fn edge() -> CsrMatrix {
        CsrMatrix::from_triplets(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap()
    }

    fn triangle() -> CsrMatrix {
        CsrMatrix::from_triplets(3, (0..3).flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j, 1.0))))
            .unwrap()
    }

    #[test]
    fn single_edge_operators() {
        let l = sym_laplacian(&edge()).unwrap();
        assert_eq!(l.to_dense(), DenseMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]));
        assert_eq!(l_hat(&l).to_dense(), DenseMatrix::from_rows(&[[0.0, -1.0], [-1.0, 0.0]]));
        assert_eq!(l_scaled(&l).to_dense(), DenseMatrix::from_rows(&[[0.5, -0.5], [-0.5, 0.5]]));
    }

    #[test]
    fn triangle_operators() {
        let l = sym_laplacian(&triangle()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { -0.5 };
                assert!((l.get(i, j) - want).abs() < 1e-15);
            }
        }
        let h = l_hat(&l);
        assert!(h.diagonal().iter().all(|&d| d == 0.0));
        let e = jacobi_eigh(&h).unwrap();
        assert!(e.values.iter().all(|&v| (-1.0 - 1e-9..=1.0 + 1e-9).contains(&v)));
    }

    #[test]
    fn isolated_nodes_keep_unit_diagonal() {
        let adj = CsrMatrix::from_triplets(3, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let l = sym_laplacian(&adj).unwrap();
        assert_eq!(l.get(2, 2), 1.0);
        let empty = CsrMatrix::from_triplets(3, []).unwrap();
        let s = l_scaled(&sym_laplacian(&empty).unwrap());
        assert_eq!(s.to_dense(), DenseMatrix::identity(3).scale(0.5));
    }

    #[test]
    fn rejects_asymmetric_adjacency() {
        let adj = CsrMatrix::from_triplets(2, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(sym_laplacian(&adj), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn operators_reconstruct_exactly() {
        let l = sym_laplacian(&triangle()).unwrap();
        assert_eq!(l_hat(&l).shift_diagonal(1.0).to_dense(), l.to_dense());
        assert_eq!(l_scaled(&l).scale(2.0), l);
        assert!(l.is_symmetric());
    }
}
