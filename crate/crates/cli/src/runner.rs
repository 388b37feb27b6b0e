//! Grid execution: every (dataset, repeat, split, variant, K) run goes to a
//! worker pool and results are merged back in grid order.

use hybspec::models::{ModelConfig, Variant};
use hybspec::trainer::{fit, MeanStd, RunResult, StabilityEvent, TrainConfig};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::data::{prepare, Prepared};
use crate::error::Result;

pub fn thread_pool(jobs: Option<usize>) -> Result<ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?)
}

/// Compact per-run record written to JSON outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub repeat: usize,
    pub split: usize,
    pub seed: u64,
    pub reported_test_acc: f64,
    pub test_acc_at_best_val: f64,
    pub final_test_acc: f64,
    pub best_epoch: usize,
    pub majority_baseline: f64,
    pub collapsed: bool,
    pub stability_events: Vec<StabilityEvent>,
}

impl RunSummary {
    fn new(repeat: usize, split: usize, r: &RunResult) -> Self {
        Self {
            repeat,
            split,
            seed: r.seed,
            reported_test_acc: r.reported_test_acc,
            test_acc_at_best_val: r.test_acc_at_best_val,
            final_test_acc: r.final_test_acc,
            best_epoch: r.best_epoch,
            majority_baseline: r.majority_baseline,
            collapsed: r.collapsed,
            stability_events: r.stability_events.clone(),
        }
    }
}

/// How a cell's runs ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CellStatus {
    Stable,
    /// Some runs collapsed.
    Partial,
    Collapsed,
    Error,
}

impl CellStatus {
    pub fn name(self) -> &'static str {
        match self {
            CellStatus::Stable => "STABLE",
            CellStatus::Partial => "PARTIAL",
            CellStatus::Collapsed => "COLLAPSED",
            CellStatus::Error => "ERROR",
        }
    }
}

/// All runs of one (dataset, variant, K).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub dataset: String,
    pub variant: Variant,
    pub k: usize,
    pub accuracy: MeanStd,
    pub collapsed_runs: usize,
    pub status: CellStatus,
    pub error: Option<String>,
    pub runs: Vec<RunSummary>,
}

impl Cell {
    fn new(dataset: &str, variant: Variant, k: usize, runs: Vec<RunSummary>, error: Option<String>) -> Self {
        let accs: Vec<f64> = runs.iter().map(|r| r.reported_test_acc).collect();
        let collapsed_runs = runs.iter().filter(|r| r.collapsed).count();
        let status = match (&error, collapsed_runs) {
            (Some(_), _) => CellStatus::Error,
            (None, 0) => CellStatus::Stable,
            (None, c) if c == runs.len() => CellStatus::Collapsed,
            (None, _) => CellStatus::Partial,
        };
        Self {
            dataset: dataset.to_owned(),
            variant,
            k,
            accuracy: MeanStd::of(&accs),
            collapsed_runs,
            status,
            error,
            runs,
        }
    }

    /// Table text: `82.16 ± 6.64` for several runs, `82.16` for one, with
    /// ` (COLLAPSED)` appended when every run collapsed.
    pub fn display(&self) -> String {
        if let Some(e) = &self.error {
            return format!("error: {e}");
        }
        let base = if self.runs.len() > 1 {
            self.accuracy.to_string()
        } else {
            format!("{:.2}", 100.0 * self.accuracy.mean)
        };
        match self.status {
            CellStatus::Collapsed => format!("{base} (COLLAPSED)"),
            CellStatus::Partial => format!("{base} ({}/{} collapsed)", self.collapsed_runs, self.runs.len()),
            _ => base,
        }
    }
}

struct Task<'a> {
    prep: &'a Prepared,
    split: usize,
    variant: Variant,
    k: usize,
}

fn run_task(cfg: &ExperimentConfig, t: &Task) -> std::result::Result<RunSummary, String> {
    let model = ModelConfig { variant: t.variant, k: t.k, ..cfg.model.clone() };
    let train = TrainConfig {
        epochs: t.prep.epochs,
        seed: t.prep.run_seed(t.split),
        adam: cfg.adam,
        selection: cfg.selection,
    };
    fit(&model, &train, &t.prep.graph, &t.prep.splits[t.split])
        .map(|(r, _)| RunSummary::new(t.prep.repeat, t.split, &r))
        .map_err(|e| e.to_string())
}

/// Runs every dataset × variant × `ks` cell of `cfg` on `pool`. A dataset
/// that cannot be built turns into error cells; the others still run.
pub fn run_grid(cfg: &ExperimentConfig, ks: &[usize], pool: &ThreadPool) -> Vec<Cell> {
    let prepared: Vec<std::result::Result<Vec<Prepared>, String>> = cfg
        .datasets
        .iter()
        .map(|d| {
            (0..cfg.repeats)
                .map(|r| prepare(cfg, d, r))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.to_string())
        })
        .collect();

    let tasks: Vec<Task> = prepared
        .iter()
        .filter_map(|p| p.as_ref().ok())
        .flat_map(|reps| {
            cfg.variants.iter().flat_map(move |&variant| {
                ks.iter().flat_map(move |&k| {
                    reps.iter()
                        .flat_map(move |prep| (0..prep.splits.len()).map(move |split| Task { prep, split, variant, k }))
                })
            })
        })
        .collect();
    let mut results = pool
        .install(|| tasks.par_iter().map(|t| run_task(cfg, t)).collect::<Vec<_>>())
        .into_iter();

    let mut cells = Vec::new();
    for (spec, prep) in cfg.datasets.iter().zip(&prepared) {
        for &variant in &cfg.variants {
            for &k in ks {
                let cell = match prep {
                    Err(e) => Cell::new(&spec.name, variant, k, Vec::new(), Some(e.clone())),
                    Ok(reps) => {
                        let n: usize = reps.iter().map(|p| p.splits.len()).sum();
                        let (ok, errs): (Vec<_>, Vec<_>) = results.by_ref().take(n).partition(|r| r.is_ok());
                        let error = errs.into_iter().find_map(|r| r.err());
                        Cell::new(&spec.name, variant, k, ok.into_iter().flatten().collect(), error)
                    }
                };
                cells.push(cell);
            }
        }
    }
    cells
}
