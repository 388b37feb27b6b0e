use std::fmt;

use serde::{Deserialize, Serialize};

use super::run::{train_with_split, RunResult};
use super::TrainConfig;
use crate::error::Result;
use crate::graph::{make_folds, Graph, SplitRatios};
use crate::models::ModelConfig;

/// Mean and population standard deviation of accuracies in `[0, 1]`.
/// Displays in percent as `82.16 ± 6.64`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

impl fmt::Display for MeanStd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2}", 100.0 * self.mean, 100.0 * self.std)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CvResult {
    pub runs: Vec<RunResult>,
    pub accuracy: MeanStd,
    pub collapsed_runs: usize,
}

impl CvResult {
    pub fn from_runs(runs: Vec<RunResult>) -> Self {
        let accs: Vec<f64> = runs.iter().map(|r| r.reported_test_acc).collect();
        Self {
            accuracy: MeanStd::of(&accs),
            collapsed_runs: runs.iter().filter(|r| r.collapsed).count(),
            runs,
        }
    }
}

/// `folds` stratified random splits drawn with `cfg.seed`, one training run
/// per split (model seed `cfg.seed` throughout).
pub fn cross_validate(
    model: &ModelConfig,
    cfg: &TrainConfig,
    g: &Graph,
    folds: usize,
    ratios: SplitRatios,
) -> Result<CvResult> {
    let splits = make_folds(g, folds, ratios, cfg.seed)?;
    let runs = splits
        .iter()
        .map(|s| train_with_split(model, cfg, g, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(CvResult::from_runs(runs))
}
