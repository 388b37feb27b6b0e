//! Accuracy versus polynomial degree.
//!
//! `k_ablation.csv` has one row per (dataset, variant, K) with columns
//! `dataset, variant, k, runs, mean, std, collapsed_runs, status, display,
//! error, root_seed`; `mean`/`std` are fractions, `display` is the console
//! text (e.g. `33.33 (COLLAPSED)`). One `k_ablation_<dataset>.svg` per dataset.

use std::collections::BTreeMap;

use hybspec::trainer::measure_overflow_degree;
use serde::Serialize;

use super::{num, write_csv, write_json, write_text, Globals};
use crate::config::{Command, ExperimentConfig};
use crate::data::{prepare, Prepared};
use crate::error::Result;
use crate::runner::{run_grid, thread_pool, Cell};
use crate::svg::Chart;
use crate::table;

/// Largest degree probed when measuring the overflow degree.
pub const OVERFLOW_PROBE_CAP: usize = 64;

#[derive(Serialize)]
struct Report<'a> {
    root_seed: u64,
    /// Per dataset: smallest K at which an untrained KrawtchoukNet
    /// (first repeat, first split seed) overflows, if any up to the cap.
    overflow_degree: BTreeMap<&'a str, Option<usize>>,
    config: &'a ExperimentConfig,
    cells: &'a [Cell],
}

/// Overflow degree of the dataset's first repetition.
pub fn overflow_degree(cfg: &ExperimentConfig, prep: &Prepared) -> Result<Option<usize>> {
    Ok(measure_overflow_degree(&prep.graph, &cfg.model, prep.run_seed(0), OVERFLOW_PROBE_CAP)?)
}

pub fn run(g: &Globals) -> Result<String> {
    let cfg = g.load(Command::KAblation)?;
    let pool = thread_pool(g.jobs)?;
    let cells = run_grid(&cfg, &cfg.k_list, &pool);
    let out = g.ensure_out_dir()?;

    let mut overflow = BTreeMap::new();
    for d in &cfg.datasets {
        let degree = match prepare(&cfg, d, 0) {
            Ok(p) => overflow_degree(&cfg, &p)?,
            Err(_) => None,
        };
        overflow.insert(d.name.as_str(), degree);
    }

    let header: Vec<String> = [
        "dataset", "variant", "k", "runs", "mean", "std", "collapsed_runs", "status", "display", "error", "root_seed",
    ]
    .map(String::from)
    .to_vec();
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            vec![
                c.dataset.clone(),
                c.variant.name().to_string(),
                c.k.to_string(),
                c.runs.len().to_string(),
                num(c.accuracy.mean),
                num(c.accuracy.std),
                c.collapsed_runs.to_string(),
                c.status.name().to_string(),
                c.display(),
                c.error.clone().unwrap_or_default(),
                cfg.seed.to_string(),
            ]
        })
        .collect();
    write_csv(&out.join("k_ablation.csv"), &header, &rows)?;
    write_json(
        &out.join("k_ablation.json"),
        &Report { root_seed: cfg.seed, overflow_degree: overflow.clone(), config: &cfg, cells: &cells },
    )?;

    let mut console = String::new();
    let mut col_header = vec!["K".to_string()];
    col_header.extend(cfg.variants.iter().map(|v| v.name().to_string()));
    for d in &cfg.datasets {
        let of = |v| cells.iter().filter(move |c| c.dataset == d.name && c.variant == v);
        let title = format!("{}: test accuracy (%) vs K", d.name);
        let chart = Chart {
            title: &title,
            root_seed: cfg.seed,
            overflow_degree: overflow[d.name.as_str()],
            series: cfg.variants.iter().map(|&v| (v.name(), of(v).collect())).collect(),
        };
        write_text(&out.join(format!("k_ablation_{}.svg", d.name)), &chart.render())?;

        let rows: Vec<Vec<String>> = cfg
            .k_list
            .iter()
            .map(|&k| {
                let mut r = vec![k.to_string()];
                r.extend(cfg.variants.iter().map(|&v| {
                    of(v).find(|c| c.k == k).map(Cell::display).unwrap_or_default()
                }));
                r
            })
            .collect();
        let degree = overflow[d.name.as_str()].map_or_else(|| format!("none up to {OVERFLOW_PROBE_CAP}"), |k| k.to_string());
        console.push_str(&format!(
            "{title} (measured Krawtchouk overflow degree: {degree}, root_seed = {})\n{}\n",
            cfg.seed,
            table::render(&col_header, &rows)
        ));
    }
    Ok(console)
}
