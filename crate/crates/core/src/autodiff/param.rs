use serde::{Deserialize, Serialize};

use crate::linalg::DenseMatrix;

/// A trainable tensor with its Adam state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: DenseMatrix,
    #[serde(skip)]
    pub grad: Option<DenseMatrix>,
    #[serde(skip)]
    pub(crate) first_moment: Option<DenseMatrix>,
    #[serde(skip)]
    pub(crate) second_moment: Option<DenseMatrix>,
    #[serde(skip)]
    pub(crate) steps: u64,
}

impl Param {
    pub fn new(name: impl Into<String>, value: DenseMatrix) -> Self {
        Self {
            name: name.into(),
            value,
            grad: None,
            first_moment: None,
            second_moment: None,
            steps: 0,
        }
    }

    pub fn numel(&self) -> usize {
        self.value.data().len()
    }

    /// Number of Adam updates applied so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }
}
