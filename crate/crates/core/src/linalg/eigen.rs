//! Cyclic Jacobi eigensolver for real symmetric matrices.
//!
//! Each sweep annihilates every off-diagonal pair `(p, q)` with one plane
//! rotation. Convergence is quadratic once the off-diagonal mass is small;
//! graphs handled here are at most a few thousand nodes.

use super::{CsrMatrix, DenseMatrix};
use crate::error::{shape_err, Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct EighOptions {
    /// Largest accepted matrix order.
    pub max_n: usize,
    pub max_sweeps: usize,
    /// Required `‖A v − λ v‖∞ / max(1, |λ|)` after convergence.
    pub residual_tol: f64,
}

impl Default for EighOptions {
    fn default() -> Self {
        Self {
            max_n: 2000,
            max_sweeps: 100,
            residual_tol: 1e-8,
        }
    }
}

/// Eigenvalues in ascending order; column `i` of `vectors` pairs with `values[i]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

pub fn jacobi_eigh(a: &CsrMatrix) -> Result<Eigen> {
    jacobi_eigh_with(a, EighOptions::default())
}

pub fn jacobi_eigh_with(a: &CsrMatrix, opts: EighOptions) -> Result<Eigen> {
    if let Some((i, j, gap)) = a.asymmetry() {
        return Err(Error::NotSymmetric { i, j, gap });
    }
    jacobi_eigh_dense_with(&a.to_dense(), opts)
}

pub fn jacobi_eigh_dense(a: &DenseMatrix) -> Result<Eigen> {
    jacobi_eigh_dense_with(a, EighOptions::default())
}

pub fn jacobi_eigh_dense_with(a: &DenseMatrix, opts: EighOptions) -> Result<Eigen> {
    let n = a.rows();
    if a.cols() != n {
        return Err(shape_err("jacobi_eigh", format!("{:?} is not square", a.shape())));
    }
    if n > opts.max_n {
        return Err(Error::TooLarge { n, cap: opts.max_n });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("eigensolver input".into()));
    }
    let scale = a.data().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let stop = 1e-15 * a.frobenius_norm();
    for i in 0..n {
        for j in 0..i {
            let gap = (a.get(i, j) - a.get(j, i)).abs();
            if gap > 1e-12 * scale {
                return Err(Error::NotSymmetric { i, j, gap });
            }
        }
    }

    let mut m = a.data().to_vec();
    let mut v = DenseMatrix::identity(n).into_data();
    let mut converged = n <= 1;
    let mut sweeps = 0;
    while !converged && sweeps < opts.max_sweeps {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, n, p, q);
            }
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        converged = off.sqrt() <= stop;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
    let values: Vec<f64> = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, dst, v[r * n + src]);
        }
    }

    let residual = max_residual(a, &values, &vectors);
    if residual > opts.residual_tol {
        return Err(Error::NoConvergence { sweeps, residual });
    }
    Ok(Eigen { values, vectors })
}

/// Applies the rotation that zeroes `m[p][q]` (and `m[q][p]`).
fn rotate(m: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = m[p * n + p];
    let aqq = m[q * n + q];
    // negligible against both diagonal entries: drop it without rotating
    let g = 100.0 * apq.abs();
    if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
        m[p * n + q] = 0.0;
        m[q * n + p] = 0.0;
        return;
    }
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // columns p and q
    for k in 0..n {
        let mkp = m[k * n + p];
        let mkq = m[k * n + q];
        m[k * n + p] = c * mkp - s * mkq;
        m[k * n + q] = s * mkp + c * mkq;
    }
    // rows p and q
    for k in 0..n {
        let mpk = m[p * n + k];
        let mqk = m[q * n + k];
        m[p * n + k] = c * mpk - s * mqk;
        m[q * n + k] = s * mpk + c * mqk;
    }
    m[p * n + q] = 0.0;
    m[q * n + p] = 0.0;

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

/// `max_i ‖A v_i − λ_i v_i‖∞ / max(1, |λ_i|)`.
pub fn max_residual(a: &DenseMatrix, values: &[f64], vectors: &DenseMatrix) -> f64 {
    let n = a.rows();
    let av = a.matmul(vectors).expect("square shapes agree");
    (0..values.len())
        .map(|i| {
            let lam = values[i];
            let worst = (0..n)
                .map(|r| (av.get(r, i) - lam * vectors.get(r, i)).abs())
                .fold(0.0, f64::max);
            worst / lam.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}
