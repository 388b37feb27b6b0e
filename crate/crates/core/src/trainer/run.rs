use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::adam::adam_step;
use super::{majority_baseline, serde_nan, Selection, TrainConfig};
use crate::autodiff::{Gradients, NodeId, Tape};
use crate::error::{Error, Result};
use crate::graph::{Graph, Split};
use crate::linalg::DenseMatrix;
use crate::models::{
    forward, Branch, EventLocation, ForwardRngs, GraphContext, ModelConfig, ModelParams, StabilityEvent, Variant,
};

/// Everything recorded for one training run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub variant: Variant,
    pub k: usize,
    pub seed: u64,
    pub epochs: usize,
    /// Per-epoch training loss (`null` in JSON when non-finite).
    #[serde(with = "serde_nan::vec")]
    pub train_loss: Vec<f64>,
    pub train_acc: Vec<f64>,
    pub val_acc: Vec<f64>,
    pub test_acc: Vec<f64>,
    pub best_epoch: usize,
    pub best_val_acc: f64,
    pub test_acc_at_best_val: f64,
    pub final_test_acc: f64,
    /// The number a results table shows: the majority baseline when
    /// collapsed, otherwise the accuracy chosen by the selection rule.
    pub reported_test_acc: f64,
    pub majority_baseline: f64,
    pub collapsed: bool,
    /// Per-epoch gradient norm over each branch's reached parameters
    /// (`null` when non-finite, 0 when the loss reached none).
    #[serde(with = "serde_nan::vec")]
    pub grad_norm_het: Vec<f64>,
    #[serde(with = "serde_nan::vec")]
    pub grad_norm_stab: Vec<f64>,
    /// Epochs in which the v4 guard dropped each branch.
    pub het_excluded_epochs: usize,
    pub stab_excluded_epochs: usize,
    /// First occurrence of each (branch, location), ordered by epoch.
    pub stability_events: Vec<StabilityEvent>,
    /// Total number of non-finite observations, repeats included.
    pub nonfinite_observations: usize,
    /// `(name, sigmoid(raw_p))` of every Krawtchouk layer after training.
    #[serde(with = "serde_nan::named")]
    pub final_p: Vec<(String, f64)>,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Fraction of masked rows whose argmax equals the label. Rows with any
/// non-finite entry count as wrong.
pub fn accuracy(logp: &DenseMatrix, labels: &[usize], mask: &[bool]) -> f64 {
    let mut total = 0usize;
    let mut hit = 0usize;
    for (r, (&l, _)) in labels.iter().zip(mask).enumerate().filter(|(_, (_, &m))| m) {
        total += 1;
        let row = logp.row(r);
        if row.iter().all(|v| v.is_finite()) {
            let best = row
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
                .0;
            hit += usize::from(best == l);
        }
    }
    if total == 0 {
        0.0
    } else {
        hit as f64 / total as f64
    }
}

struct EventLog {
    seen: BTreeSet<(Branch, EventLocation)>,
    events: Vec<StabilityEvent>,
    observations: usize,
}

impl EventLog {
    fn record(&mut self, epoch: usize, mut e: StabilityEvent) {
        self.observations += 1;
        if self.seen.insert((e.branch, e.location.clone())) {
            e.epoch = epoch;
            self.events.push(e);
        }
    }
}

/// Trains on the graph's attached split.
pub fn train(model: &ModelConfig, cfg: &TrainConfig, g: &Graph) -> Result<RunResult> {
    let split = g.split().ok_or_else(|| Error::Config("graph has no train/val/test split".into()))?;
    train_with_split(model, cfg, g, split)
}

pub fn train_with_split(model: &ModelConfig, cfg: &TrainConfig, g: &Graph, split: &Split) -> Result<RunResult> {
    fit(model, cfg, g, split).map(|(r, _)| r)
}

/// Full-batch training with Adam, returning the trained parameters too.
/// Deterministic for a given seed.
pub fn fit(model: &ModelConfig, cfg: &TrainConfig, g: &Graph, split: &Split) -> Result<(RunResult, ModelParams)> {
    cfg.validate()?;
    model.validate()?;
    if split.len() != g.n() {
        return Err(Error::Config(format!("split covers {} nodes, graph has {}", split.len(), g.n())));
    }
    let start = Instant::now();
    let ctx = GraphContext::new(g, model.k)?;
    let mut params = ModelParams::init(model, g.num_features(), g.num_classes(), cfg.seed)?;
    let mut rngs = ForwardRngs::new(cfg.seed);
    let labels = g.labels();
    let mut log = EventLog { seen: BTreeSet::new(), events: Vec::new(), observations: 0 };

    let mut train_loss = Vec::with_capacity(cfg.epochs);
    let (mut train_acc, mut val_acc, mut test_acc) = (Vec::new(), Vec::new(), Vec::new());
    let (mut het_excluded, mut stab_excluded) = (0, 0);
    let (mut grad_norm_het, mut grad_norm_stab) = (Vec::new(), Vec::new());
    let mut final_collapsed = false;

    for epoch in 0..cfg.epochs {
        let grads = {
            let mut tape = Tape::new();
            let out = forward(&mut tape, &ctx, &params, model, true, &mut rngs)?;
            for e in out.events {
                log.record(epoch, e);
            }
            het_excluded += usize::from(out.excluded.contains(&Branch::Het));
            stab_excluded += usize::from(out.excluded.contains(&Branch::Stab));
            let mut loss = tape.nll_loss(out.head, labels, &split.train)?;
            if model.variant == Variant::HybV4 && model.aux_branch_loss {
                let surviving: Vec<NodeId> = [(Branch::Het, out.out_het), (Branch::Stab, out.out_stab)]
                    .into_iter()
                    .filter(|(b, _)| !out.excluded.contains(b))
                    .filter_map(|(_, n)| n)
                    .collect();
                for head in surviving {
                    let aux = tape.nll_loss(head, labels, &split.train)?;
                    loss = tape.add(loss, aux)?;
                }
            }
            train_loss.push(tape.value(loss).get(0, 0));
            tape.backward(loss)?
        };
        grad_norm_het.push(branch_grad_norm(&params, &grads, Branch::Het));
        grad_norm_stab.push(branch_grad_norm(&params, &grads, Branch::Stab));
        let report = adam_step(&mut params.params, &grads, &cfg.adam);
        for slot in report.skipped_nonfinite {
            let probe = grads.param(slot).map(|g| g.finite_probe().max_abs).unwrap_or(0.0);
            let e = StabilityEvent {
                epoch,
                branch: params.branch_of(slot),
                location: EventLocation::Gradient { param: params.params[slot].name.clone() },
                max_abs_before: probe,
            };
            log.record(epoch, e);
        }

        let mut tape = Tape::new();
        let out = forward(&mut tape, &ctx, &params, model, false, &mut rngs)?;
        let head = tape.value(out.head);
        train_acc.push(accuracy(head, labels, &split.train));
        val_acc.push(accuracy(head, labels, &split.val));
        test_acc.push(accuracy(head, labels, &split.test));
        final_collapsed = out.collapsed;
    }

    let best_epoch = val_acc
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > val_acc[best] { i } else { best });
    let baseline = majority_baseline(labels, &split.train, &split.test);
    let final_test = *test_acc.last().expect("epochs >= 1");
    let selected = match cfg.selection {
        Selection::BestVal => test_acc[best_epoch],
        Selection::FinalEpoch => final_test,
    };
    let result = RunResult {
        variant: model.variant,
        k: model.k,
        seed: cfg.seed,
        epochs: cfg.epochs,
        best_epoch,
        best_val_acc: val_acc[best_epoch],
        test_acc_at_best_val: test_acc[best_epoch],
        final_test_acc: final_test,
        reported_test_acc: if final_collapsed { baseline } else { selected },
        majority_baseline: baseline,
        collapsed: final_collapsed,
        grad_norm_het,
        grad_norm_stab,
        het_excluded_epochs: het_excluded,
        stab_excluded_epochs: stab_excluded,
        stability_events: log.events,
        nonfinite_observations: log.observations,
        final_p: params.krawtchouk_p(),
        train_loss,
        train_acc,
        val_acc,
        test_acc,
        wall_time: start.elapsed(),
    };
    Ok((result, params))
}

fn branch_grad_norm(params: &ModelParams, grads: &Gradients, branch: Branch) -> f64 {
    grads
        .reached_params()
        .filter(|&slot| params.branch_of(slot) == branch)
        .filter_map(|slot| grads.param(slot))
        .flat_map(|g| g.data().iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Smallest `K ≤ cap` at which an untrained KrawtchoukNet (eval mode,
/// `raw_p = raw_p_init`) produces a non-finite head on `g`.
pub fn measure_overflow_degree(g: &Graph, template: &ModelConfig, seed: u64, cap: usize) -> Result<Option<usize>> {
    for k in 1..=cap {
        let cfg = ModelConfig { variant: Variant::Krawtchouk, k, ..template.clone() };
        let ctx = GraphContext::new(g, k)?;
        let params = ModelParams::init(&cfg, g.num_features(), g.num_classes(), seed)?;
        let mut tape = Tape::new();
        let out = forward(&mut tape, &ctx, &params, &cfg, false, &mut ForwardRngs::new(seed))?;
        if out.collapsed {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
