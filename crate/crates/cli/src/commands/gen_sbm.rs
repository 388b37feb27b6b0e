//! Writes each configured SBM dataset (first repetition) as graph files
//! that the `files` dataset source can read back.

use std::fs;

use hybspec::graph::{edge_homophily, write_graph, SbmConfig};
use serde::Serialize;

use super::{write_json, Globals};
use crate::config::Command;
use crate::data::repeat_seed;
use crate::error::{io_err, Result};
use crate::table;

#[derive(Serialize)]
struct Meta<'a> {
    root_seed: u64,
    name: &'a str,
    sbm: &'a SbmConfig,
    nodes: usize,
    edges: usize,
    edge_homophily: f64,
    class_counts: Vec<usize>,
}

/// Prefixes the file with a `# root_seed=..` comment line.
fn stamp(path: &std::path::Path, root_seed: u64) -> Result<()> {
    let body = fs::read_to_string(path).map_err(io_err(path))?;
    fs::write(path, format!("# root_seed={root_seed}\n{body}")).map_err(io_err(path))
}

pub fn run(g: &Globals) -> Result<String> {
    let cfg = g.load(Command::GenSbm)?;
    let out = g.ensure_out_dir()?;
    let mut rows = Vec::new();
    for d in &cfg.datasets {
        let Some(sbm) = &d.sbm else { continue };
        let sbm = SbmConfig { seed: repeat_seed(cfg.seed, &d.name, 0), ..sbm.clone() };
        let graph = hybspec::graph::generate_sbm(&sbm)?;
        let dir = out.join(&d.name);
        write_graph(&graph, &dir)?;
        for f in ["edges.txt", "features.txt"] {
            stamp(&dir.join(f), cfg.seed)?;
        }
        let meta = Meta {
            root_seed: cfg.seed,
            name: &d.name,
            sbm: &sbm,
            nodes: graph.n(),
            edges: graph.num_edges(),
            edge_homophily: edge_homophily(&graph),
            class_counts: graph.class_counts(),
        };
        write_json(&dir.join("graph.json"), &meta)?;
        rows.push(vec![
            d.name.clone(),
            graph.n().to_string(),
            graph.num_edges().to_string(),
            format!("{:.3}", meta.edge_homophily),
            dir.display().to_string(),
        ]);
    }
    let header: Vec<String> = ["dataset", "nodes", "edges", "homophily", "directory"].map(String::from).to_vec();
    Ok(format!("root_seed = {}\n{}", cfg.seed, table::render(&header, &rows)))
}
