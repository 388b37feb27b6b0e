//! Accuracy of every model on every dataset at one K.
//!
//! `unified.csv` has one row per dataset. For each variant `v` it holds the
//! columns `v` (the console text), `v_mean` and `v_std` (fractions in
//! `[0, 1]`), `v_runs` and `v_collapsed_runs`, followed by `error` and
//! `root_seed`.

use serde::Serialize;

use super::{num, write_csv, write_json, Globals};
use crate::config::{Command, ExperimentConfig};
use crate::error::Result;
use crate::runner::{run_grid, thread_pool, Cell};
use crate::table;

#[derive(Serialize)]
struct Report<'a> {
    root_seed: u64,
    k: usize,
    config: &'a ExperimentConfig,
    cells: &'a [Cell],
}

pub fn run(g: &Globals) -> Result<String> {
    let cfg = g.load(Command::Unified)?;
    let pool = thread_pool(g.jobs)?;
    let cells = run_grid(&cfg, &[cfg.model.k], &pool);
    let out = g.ensure_out_dir()?;

    let per_dataset = cfg.variants.len();
    let mut header = vec!["dataset".to_string()];
    for v in &cfg.variants {
        let n = v.name();
        header.extend([n.to_string(), format!("{n}_mean"), format!("{n}_std"), format!("{n}_runs"), format!("{n}_collapsed_runs")]);
    }
    header.extend(["error".to_string(), "root_seed".to_string()]);

    let mut rows = Vec::new();
    let mut console_rows = Vec::new();
    for (spec, chunk) in cfg.datasets.iter().zip(cells.chunks(per_dataset)) {
        let mut row = vec![spec.name.clone()];
        let mut console = vec![spec.name.clone()];
        for c in chunk {
            row.extend([
                c.display(),
                num(c.accuracy.mean),
                num(c.accuracy.std),
                c.runs.len().to_string(),
                c.collapsed_runs.to_string(),
            ]);
            console.push(c.display());
        }
        row.push(chunk.iter().find_map(|c| c.error.clone()).unwrap_or_default());
        row.push(cfg.seed.to_string());
        rows.push(row);
        console_rows.push(console);
    }
    write_csv(&out.join("unified.csv"), &header, &rows)?;
    write_json(
        &out.join("unified.json"),
        &Report { root_seed: cfg.seed, k: cfg.model.k, config: &cfg, cells: &cells },
    )?;

    let mut console_header = vec!["dataset".to_string()];
    console_header.extend(cfg.variants.iter().map(|v| v.name().to_string()));
    Ok(format!(
        "Test accuracy (%), K = {}, H = {}, root_seed = {}\n{}",
        cfg.model.k,
        cfg.model.hidden,
        cfg.seed,
        table::render(&console_header, &console_rows)
    ))
}
