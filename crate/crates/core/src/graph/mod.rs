//! Graphs, the two spectral operators, synthetic generation and file I/O.

mod folds;
mod io;
mod laplacian;
mod sbm;

pub use folds::{make_folds, random_split, SplitRatios};
pub use io::{load_graph, write_graph, LoadOptions, MaskFile};
pub use laplacian::{l_hat, l_scaled, sym_laplacian, SpectralOperators};
pub use sbm::{edge_homophily, generate_sbm, SbmConfig};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};

/// Train/validation/test membership for every node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

impl Split {
    pub fn new(train: Vec<bool>, val: Vec<bool>, test: Vec<bool>) -> Result<Self> {
        let n = train.len();
        if val.len() != n || test.len() != n {
            return Err(Error::Config("mask lengths differ".into()));
        }
        if let Some(i) = (0..n).find(|&i| (train[i] as u8 + val[i] as u8 + test[i] as u8) > 1) {
            return Err(Error::Config(format!("node {i} is in more than one mask")));
        }
        Ok(Self { train, val, test })
    }

    pub fn from_indices(n: usize, train: &[usize], val: &[usize], test: &[usize]) -> Result<Self> {
        let to_mask = |idx: &[usize], name: &str| -> Result<Vec<bool>> {
            let mut m = vec![false; n];
            for &i in idx {
                if i >= n {
                    return Err(Error::Config(format!("{name} index {i} out of range for {n} nodes")));
                }
                m[i] = true;
            }
            Ok(m)
        };
        Self::new(to_mask(train, "train")?, to_mask(val, "val")?, to_mask(test, "test")?)
    }

    pub fn indices(mask: &[bool]) -> Vec<usize> {
        mask.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.train.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train.is_empty()
    }
}

/// A node-classification graph.
///
/// The adjacency is symmetric with a zero diagonal; labels lie in
/// `0..num_classes`.
#[derive(Clone, Debug)]
pub struct Graph {
    adjacency: CsrMatrix,
    features: DenseMatrix,
    labels: Vec<usize>,
    num_classes: usize,
    split: Option<Split>,
}

impl Graph {
    pub fn new(
        adjacency: CsrMatrix,
        features: DenseMatrix,
        labels: Vec<usize>,
        num_classes: usize,
        split: Option<Split>,
    ) -> Result<Self> {
        let n = adjacency.n();
        if features.rows() != n || labels.len() != n {
            return Err(Error::Config(format!(
                "{n} nodes but {} feature rows and {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if let Some((i, j, gap)) = adjacency.asymmetry() {
            return Err(Error::NotSymmetric { i, j, gap });
        }
        if let Some(i) = (0..n).find(|&i| adjacency.get(i, i) != 0.0) {
            return Err(Error::Config(format!("self-loop at node {i}")));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::Config(format!("label {l} outside 0..{num_classes}")));
        }
        if let Some(s) = &split {
            if s.len() != n {
                return Err(Error::Config("split length differs from node count".into()));
            }
        }
        Ok(Self {
            adjacency,
            features,
            labels,
            num_classes,
            split,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.n()
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn split(&self) -> Option<&Split> {
        self.split.as_ref()
    }

    pub fn with_split(mut self, split: Split) -> Result<Self> {
        if split.len() != self.n() {
            return Err(Error::Config("split length differs from node count".into()));
        }
        self.split = Some(split);
        Ok(self)
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.adjacency.nnz() / 2
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}
