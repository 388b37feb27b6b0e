//! Full-batch training, evaluation and cross-validation.

mod adam;
mod cv;
mod run;
mod serde_nan;

use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamConfig, StepReport};
pub use cv::{cross_validate, CvResult, MeanStd};
pub use run::{accuracy, fit, measure_overflow_degree, train, train_with_split, RunResult};

pub use crate::models::StabilityEvent;

use crate::error::{Error, Result};

/// Which epoch's test accuracy a run reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Test accuracy at the epoch with the best validation accuracy
    /// (earliest on ties).
    #[default]
    BestVal,
    FinalEpoch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub selection: Selection,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            seed: 0,
            adam: AdamConfig::default(),
            selection: Selection::default(),
        }
    }
}

impl TrainConfig {
    /// 200 epochs, the homophilic protocol.
    pub fn homophilic(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// 400 epochs, the heterophilic protocol.
    pub fn heterophilic(seed: u64) -> Self {
        Self { epochs: 400, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.adam.lr > 0.0 && self.adam.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.adam.lr)));
        }
        if !(self.adam.weight_decay >= 0.0) {
            return Err(Error::Config("weight decay must be non-negative".into()));
        }
        if !((0.0..1.0).contains(&self.adam.beta1) && (0.0..1.0).contains(&self.adam.beta2)) {
            return Err(Error::Config("Adam betas must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Accuracy on `eval_mask` of always predicting the most frequent class of
/// `train_mask` (smallest class index on ties).
pub fn majority_baseline(labels: &[usize], train_mask: &[bool], eval_mask: &[bool]) -> f64 {
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; classes];
    for (&l, _) in labels.iter().zip(train_mask).filter(|(_, &m)| m) {
        counts[l] += 1;
    }
    let majority = counts
        .iter()
        .enumerate()
        .fold(0, |best, (c, &n)| if n > counts[best] { c } else { best });
    let (hit, total) = labels
        .iter()
        .zip(eval_mask)
        .filter(|(_, &m)| m)
        .fold((0usize, 0usize), |(h, t), (&l, _)| (h + usize::from(l == majority), t + 1));
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}
