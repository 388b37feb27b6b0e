//! One training run, saved as a checkpoint for `response`.

use hybspec::models::{Checkpoint, ModelConfig};
use hybspec::trainer::{fit, TrainConfig};

use super::{write_json, Globals};
use crate::config::Command;
use crate::data::prepare;
use crate::error::{CliError, Result};

/// Trains the first configured variant on the first split of the first
/// dataset; writes `run.json` and `checkpoint.json`.
pub fn run(g: &Globals) -> Result<String> {
    let cfg = g.load(Command::Train)?;
    let spec = cfg.datasets.first().ok_or_else(|| CliError::Config("no dataset configured".into()))?;
    let variant = cfg.variants[0];
    let prep = prepare(&cfg, spec, 0)?;
    let model = ModelConfig { variant, ..cfg.model.clone() };
    let train = TrainConfig { epochs: prep.epochs, seed: prep.run_seed(0), adam: cfg.adam, selection: cfg.selection };
    let (result, params) = fit(&model, &train, &prep.graph, &prep.splits[0])?;

    let out = g.ensure_out_dir()?;
    write_json(&out.join("run.json"), &serde_json::json!({ "root_seed": cfg.seed, "dataset": spec.name, "run": result }))?;
    let path = out.join("checkpoint.json");
    Checkpoint::from_model(&model, &params).save(&path)?;
    let collapsed = if result.collapsed { " (COLLAPSED)" } else { "" };
    Ok(format!(
        "{} on {} (K = {}, {} epochs, root_seed = {}): test accuracy {:.2}{collapsed}, best epoch {}\ncheckpoint: {}\n",
        variant.name(),
        spec.name,
        model.k,
        prep.epochs,
        cfg.seed,
        100.0 * result.reported_test_acc,
        result.best_epoch,
        path.display()
    ))
}
