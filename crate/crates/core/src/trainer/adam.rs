use serde::{Deserialize, Serialize};

use crate::autodiff::{Gradients, Param};
use crate::linalg::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            weight_decay: 5e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Outcome of one optimizer step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    pub updated: Vec<usize>,
    /// Parameters whose gradient had a non-finite entry; left untouched.
    pub skipped_nonfinite: Vec<usize>,
    /// Parameters the loss does not reach; left untouched.
    pub unreached: Vec<usize>,
}

/// Bias-corrected Adam with L2 weight decay added to the gradient.
///
/// Each parameter keeps its own step count, so a parameter that was skipped
/// resumes with the correct bias correction.
pub fn adam_step(params: &mut [Param], grads: &Gradients, cfg: &AdamConfig) -> StepReport {
    let mut report = StepReport::default();
    for (slot, p) in params.iter_mut().enumerate() {
        let Some(g) = grads.param(slot) else {
            report.unreached.push(slot);
            continue;
        };
        if !g.is_finite() {
            report.skipped_nonfinite.push(slot);
            continue;
        }
        update(p, g, cfg);
        report.updated.push(slot);
    }
    report
}

fn update(p: &mut Param, g: &DenseMatrix, cfg: &AdamConfig) {
    let (rows, cols) = p.value.shape();
    let m = p.first_moment.get_or_insert_with(|| DenseMatrix::zeros(rows, cols));
    let v = p.second_moment.get_or_insert_with(|| DenseMatrix::zeros(rows, cols));
    p.steps += 1;
    let t = p.steps as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    let theta = p.value.data_mut();
    for (((th, &gi), mi), vi) in theta.iter_mut().zip(g.data()).zip(m.data_mut()).zip(v.data_mut()) {
        let gi = gi + cfg.weight_decay * *th;
        *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
        *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
        *th -= cfg.lr * (*mi / c1) / ((*vi / c2).sqrt() + cfg.eps);
    }
    p.grad = Some(g.clone());
}
