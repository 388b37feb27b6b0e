//! Side-by-side v3/v4 run at a degree where the Krawtchouk basis overflows,
//! with seed-matched single-branch references.

use std::fmt::Write as _;

use hybspec::models::{Branch, EventLocation, ModelConfig, Variant};
use hybspec::trainer::{fit, RunResult, StabilityEvent, TrainConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ablation::{overflow_degree, OVERFLOW_PROBE_CAP};
use super::{write_json, Globals};
use crate::config::Command;
use crate::data::prepare;
use crate::error::{CliError, Result};
use crate::runner::thread_pool;

const VARIANTS: [Variant; 4] = [Variant::HybV3, Variant::HybV4, Variant::Cheby, Variant::Krawtchouk];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub variant: Variant,
    pub reported_test_acc: f64,
    pub majority_baseline: f64,
    pub collapsed: bool,
    pub first_event: Option<StabilityEvent>,
    /// First epoch whose stable-branch (Chebyshev) gradient was non-finite.
    pub first_nonfinite_stab_grad_epoch: Option<usize>,
    /// Every epoch's stable-branch gradient norm was finite.
    pub stab_grad_norms_finite: bool,
    /// Per-epoch stable-branch gradient norm (`null` when non-finite).
    pub stab_grad_norm: Vec<Option<f64>>,
    pub het_excluded_epochs: usize,
    pub stability_events: Vec<StabilityEvent>,
}

impl VariantReport {
    fn new(r: &RunResult) -> Self {
        let first_nonfinite_stab_grad_epoch = r
            .stability_events
            .iter()
            .filter(|e| e.branch == Branch::Stab && matches!(e.location, EventLocation::Gradient { .. }))
            .map(|e| e.epoch)
            .chain(r.grad_norm_stab.iter().position(|v| !v.is_finite()))
            .min();
        Self {
            variant: r.variant,
            reported_test_acc: r.reported_test_acc,
            majority_baseline: r.majority_baseline,
            collapsed: r.collapsed,
            first_event: r.stability_events.first().cloned(),
            first_nonfinite_stab_grad_epoch,
            stab_grad_norms_finite: r.grad_norm_stab.iter().all(|v| v.is_finite()),
            stab_grad_norm: r.grad_norm_stab.iter().map(|v| v.is_finite().then_some(*v)).collect(),
            het_excluded_epochs: r.het_excluded_epochs,
            stability_events: r.stability_events.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoisonReport {
    pub root_seed: u64,
    pub dataset: String,
    pub k: usize,
    pub raw_p_init: f64,
    pub overflow_degree: Option<usize>,
    pub runs: Vec<VariantReport>,
}

impl PoisonReport {
    pub fn get(&self, v: Variant) -> Option<&VariantReport> {
        self.runs.iter().find(|r| r.variant == v)
    }

    pub fn narrative(&self) -> String {
        let mut s = String::new();
        let degree = self.overflow_degree.map_or_else(|| format!("none up to {OVERFLOW_PROBE_CAP}"), |d| d.to_string());
        let _ = writeln!(
            s,
            "Poisoning demo on {} at K = {} (raw_p_init = {}, measured overflow degree: {degree}, root_seed = {})",
            self.dataset, self.k, self.raw_p_init, self.root_seed
        );
        if self.runs.iter().all(|r| r.stability_events.is_empty()) {
            let _ = writeln!(s, "no events: every branch stayed finite at this degree");
        }
        for r in &self.runs {
            let status = if r.collapsed { " (COLLAPSED)" } else { "" };
            let _ = writeln!(s, "{:<11} test accuracy {:.2}{status}", r.variant.name(), 100.0 * r.reported_test_acc);
            if let Some(e) = &r.first_event {
                let _ = writeln!(
                    s,
                    "  first event: epoch {}, {} branch, {} (largest finite magnitude before: {:.3e})",
                    e.epoch,
                    e.branch.name(),
                    describe(&e.location),
                    e.max_abs_before
                );
            }
            match (r.variant, r.first_nonfinite_stab_grad_epoch) {
                (_, Some(ep)) => {
                    let _ = writeln!(s, "  stable-branch gradients first non-finite at epoch {ep}; updates skipped");
                }
                (Variant::HybV4 | Variant::Cheby | Variant::HybV3, None) => {
                    let _ = writeln!(
                        s,
                        "  stable-branch gradient norms finite in all {} epochs",
                        r.stab_grad_norm.len()
                    );
                }
                _ => {}
            }
            if r.het_excluded_epochs > 0 {
                let _ = writeln!(s, "  fusion guard dropped the Krawtchouk branch in {} epochs", r.het_excluded_epochs);
            }
        }
        s
    }
}

fn describe(loc: &EventLocation) -> String {
    match loc {
        EventLocation::BasisOrder { layer, order } => format!("basis order {order} of layer {layer}"),
        EventLocation::LayerOutput { layer } => format!("output of layer {layer}"),
        EventLocation::Head => "log-probability head".into(),
        EventLocation::Gradient { param } => format!("gradient of {param}"),
    }
}

/// Runs the demo at `k`, or at the measured overflow degree when `None`.
pub fn report(g: &Globals, k: Option<usize>) -> Result<PoisonReport> {
    let cfg = g.load(Command::PoisonDemo)?;
    let spec = cfg.datasets.first().ok_or_else(|| CliError::Config("no dataset configured".into()))?;
    let prep = prepare(&cfg, spec, 0)?;
    let degree = overflow_degree(&cfg, &prep)?;
    let k = match (k, degree) {
        (Some(k), _) => k,
        (None, Some(d)) => d,
        (None, None) => {
            return Err(CliError::Config(format!(
                "no Krawtchouk overflow up to K = {OVERFLOW_PROBE_CAP}; pass --k or lower model.raw_p_init"
            )))
        }
    };
    let train = TrainConfig { epochs: prep.epochs, seed: prep.run_seed(0), adam: cfg.adam, selection: cfg.selection };
    let pool = thread_pool(g.jobs)?;
    let runs = pool.install(|| {
        VARIANTS
            .par_iter()
            .map(|&variant| {
                let model = ModelConfig { variant, k, ..cfg.model.clone() };
                fit(&model, &train, &prep.graph, &prep.splits[0]).map(|(r, _)| VariantReport::new(&r))
            })
            .collect::<hybspec::Result<Vec<_>>>()
    })?;
    Ok(PoisonReport {
        root_seed: cfg.seed,
        dataset: spec.name.clone(),
        k,
        raw_p_init: cfg.model.raw_p_init,
        overflow_degree: degree,
        runs,
    })
}

pub fn run(g: &Globals, k: Option<usize>) -> Result<String> {
    let r = report(g, k)?;
    let out = g.ensure_out_dir()?;
    write_json(&out.join("poison_demo.json"), &r)?;
    Ok(r.narrative())
}
