use serde::{Deserialize, Serialize};

use super::DenseMatrix;
use crate::error::{shape_err, Error, Result};

/// Square sparse matrix in compressed-sparse-row form.
///
/// Column indices are strictly increasing within each row, so `spmm`
/// sums each row in ascending column order and is bitwise reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Validates raw CSR arrays.
    pub fn new(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, vals: Vec<f64>) -> Result<Self> {
        if row_ptr.len() != n + 1 {
            return Err(Error::InvalidCsr(format!(
                "row_ptr has length {} for n = {n}",
                row_ptr.len()
            )));
        }
        if row_ptr[0] != 0 || row_ptr[n] != col_idx.len() || col_idx.len() != vals.len() {
            return Err(Error::InvalidCsr("row_ptr does not bracket the entries".into()));
        }
        for r in 0..n {
            if row_ptr[r] > row_ptr[r + 1] {
                return Err(Error::InvalidCsr(format!("row_ptr decreases at row {r}")));
            }
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.iter().any(|&c| c >= n) {
                return Err(Error::InvalidCsr(format!("column out of range in row {r}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidCsr(format!(
                    "columns not strictly increasing in row {r}"
                )));
            }
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            vals,
        })
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r >= n || c >= n) {
            return Err(Error::InvalidCsr(format!("entry ({r}, {c}) outside {n}x{n}")));
        }
        entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            vals.push(v);
            last = Some((r, c));
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            vals,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![1.0; n],
        }
    }

    /// Keeps the nonzero entries of a square dense matrix.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(shape_err("CsrMatrix::from_dense", format!("{:?} is not square", m.shape())));
        }
        let n = m.rows();
        Self::from_triplets(
            n,
            (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).filter_map(|(r, c)| {
                let v = m.get(r, c);
                (v != 0.0).then_some((r, c, v))
            }),
        )
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn vals(&self) -> &[f64] {
        &self.vals
    }

    /// `(column, value)` pairs of one row in ascending column order.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(pos) => self.vals[span.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                out.set(r, c, v);
            }
        }
        out
    }

    /// Sparse-dense product `self · x`.
    pub fn spmm(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n != x.rows() {
            return Err(shape_err("spmm", format!("{0}x{0} x {1:?}", self.n, x.shape())));
        }
        let f = x.cols();
        let mut out = DenseMatrix::zeros(self.n, f);
        for r in 0..self.n {
            let out_row = out.row_mut(r);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.vals[k];
                for (o, &b) in out_row.iter_mut().zip(x.row(self.col_idx[k])) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Largest `|a_ij - a_ji|` with its position, `None` when exactly symmetric.
    pub fn asymmetry(&self) -> Option<(usize, usize, f64)> {
        let mut worst: Option<(usize, usize, f64)> = None;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                let gap = (v - self.get(c, r)).abs();
                if gap > 0.0 && worst.is_none_or(|w| gap > w.2) {
                    worst = Some((r, c, gap));
                }
                if gap.is_nan() {
                    return Some((r, c, f64::NAN));
                }
            }
        }
        worst
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetry().is_none()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Adds `delta` to every diagonal entry, inserting missing ones.
    pub fn shift_diagonal(&self, delta: f64) -> Self {
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + self.n);
        for r in 0..self.n {
            triplets.extend(self.row(r).map(|(c, v)| (r, c, v)));
            triplets.push((r, r, delta));
        }
        // Summation of a single existing entry with delta is one rounding,
        // identical to `v + delta`.
        Self::from_triplets(self.n, triplets).expect("indices already validated")
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            vals: self.vals.iter().map(|v| alpha * v).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_csr(n: usize, density: f64, rng: &mut ChaCha8Rng) -> CsrMatrix {
        let mut t = Vec::new();
        for r in 0..n {
            for c in 0..n {
                if rng.random::<f64>() < density {
                    t.push((r, c, rng.random_range(-2.0..2.0)));
                }
            }
        }
        CsrMatrix::from_triplets(n, t).unwrap()
    }

    #[test]
    fn identity_spmm_is_noop() {
        let x = DenseMatrix::from_rows(&[[1.0, -2.0], [0.5, 3.0], [7.0, 8.0]]);
        assert_eq!(CsrMatrix::identity(3).spmm(&x).unwrap(), x);
    }

    #[test]
    fn permutation_spmm() {
        let a = CsrMatrix::from_triplets(2, [(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let x = DenseMatrix::from_rows(&[[1.0], [2.0]]);
        assert_eq!(a.spmm(&x).unwrap(), DenseMatrix::from_rows(&[[2.0], [1.0]]));
    }

    #[test]
    fn spmm_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [5usize, 9, 17, 32] {
            let a = random_csr(n, 0.4, &mut rng);
            let x = DenseMatrix::new(n, 3, (0..3 * n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let got = a.spmm(&x).unwrap();
            let want = a.to_dense().matmul(&x).unwrap();
            assert!(got.max_abs_diff(&want).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn spmm_dimension_mismatch() {
        let a = CsrMatrix::identity(3);
        assert!(matches!(a.spmm(&DenseMatrix::zeros(2, 1)), Err(Error::Shape { .. })));
    }

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = CsrMatrix::from_triplets(3, [(2, 0, 1.0), (0, 2, 1.0), (0, 1, 1.0), (0, 1, 2.0)]).unwrap();
        assert_eq!(a.row_ptr(), &[0, 2, 2, 3]);
        assert_eq!(a.col_idx(), &[1, 2, 0]);
        assert_eq!(a.get(0, 1), 3.0);
        assert!(!a.is_symmetric());
    }

    #[test]
    fn new_rejects_unsorted_columns() {
        assert!(CsrMatrix::new(2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(CsrMatrix::new(2, vec![0, 1, 1], vec![5], vec![1.0]).is_err());
        assert!(CsrMatrix::new(2, vec![0, 1, 2], vec![1, 0], vec![1.0, 1.0]).is_ok());
    }

    #[test]
    fn shift_diagonal_inserts_missing_entries() {
        let a = CsrMatrix::from_triplets(2, [(0, 1, -1.0), (1, 0, -1.0), (1, 1, 4.0)]).unwrap();
        let b = a.shift_diagonal(-1.0);
        assert_eq!(b.to_dense(), DenseMatrix::from_rows(&[[-1.0, -1.0], [-1.0, 3.0]]));
    }

    proptest::proptest! {
        #[test]
        fn spmm_equals_dense_product(seed in 0u64..10_000, n in 1usize..=32, f in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_csr(n, 0.3, &mut rng);
            let x = DenseMatrix::new(n, f, (0..n * f).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
            let diff = a.spmm(&x).unwrap().max_abs_diff(&a.to_dense().matmul(&x).unwrap()).unwrap();
            proptest::prop_assert!(diff <= 1e-12);
        }
    }
}
