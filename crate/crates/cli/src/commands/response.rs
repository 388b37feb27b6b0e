//! Learned filter responses of a saved model.
//!
//! `response.csv` columns: `branch, layer, kind, p, lambda, lambda_operator,
//! mean, norm, root_seed`, one row per (layer, grid point). `lambda` is an
//! `L_sym` eigenvalue; `lambda_operator` is what the layer's basis sees.

use std::path::Path;

use hybspec::models::{filter_responses, Checkpoint, LayerResponse};
use hybspec::poly::FilterKind;
use serde::Serialize;

use super::{num, write_csv, write_json, Globals};
use crate::config::Command;
use crate::error::{CliError, Result};
use crate::table;

#[derive(Clone, Copy, Debug)]
pub struct Grid {
    pub points: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self { points: 101, lambda_min: 0.0, lambda_max: 2.0 }
    }
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 || !(self.lambda_max > self.lambda_min) {
            return Err(CliError::Config("grid needs at least 2 points and lambda_max > lambda_min".into()));
        }
        let step = (self.lambda_max - self.lambda_min) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| if i + 1 == self.points { self.lambda_max } else { self.lambda_min + step * i as f64 })
            .collect())
    }
}

#[derive(Serialize)]
struct Report<'a> {
    root_seed: u64,
    /// File name only, so the report does not depend on where it lives.
    checkpoint: String,
    layers: &'a [LayerResponse],
}

pub fn responses(checkpoint: &Path, grid: &Grid) -> Result<Vec<LayerResponse>> {
    let ckpt = Checkpoint::load(checkpoint)?;
    let (cfg, params) = ckpt.to_model()?;
    Ok(filter_responses(&cfg, &params, &grid.values()?)?)
}

pub fn run(g: &Globals, checkpoint: &Path, grid: &Grid) -> Result<String> {
    let root_seed = g.load(Command::Response)?.seed;
    let layers = responses(checkpoint, grid)?;
    let out = g.ensure_out_dir()?;

    let header: Vec<String> = ["branch", "layer", "kind", "p", "lambda", "lambda_operator", "mean", "norm", "root_seed"]
        .map(String::from)
        .to_vec();
    let kind_name = |k: FilterKind| match k {
        FilterKind::Cheb => "cheb",
        FilterKind::Krawtchouk => "krawtchouk",
    };
    let mut rows = Vec::new();
    for l in &layers {
        for i in 0..l.lambda.len() {
            rows.push(vec![
                l.branch.name().to_string(),
                l.layer.to_string(),
                kind_name(l.kind).to_string(),
                l.p.map(num).unwrap_or_default(),
                num(l.lambda[i]),
                num(l.lambda_operator[i]),
                num(l.mean[i]),
                num(l.norm[i]),
                root_seed.to_string(),
            ]);
        }
    }
    write_csv(&out.join("response.csv"), &header, &rows)?;
    write_json(
        &out.join("response.json"),
        &Report { root_seed, checkpoint: checkpoint.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(), layers: &layers },
    )?;

    let console_header: Vec<String> = ["branch", "layer", "kind", "p", "norm(low)", "norm(high)"].map(String::from).to_vec();
    let console_rows: Vec<Vec<String>> = layers
        .iter()
        .map(|l| {
            vec![
                l.branch.name().to_string(),
                l.layer.to_string(),
                kind_name(l.kind).to_string(),
                l.p.map_or_else(|| "-".to_string(), |p| format!("{p:.4}")),
                format!("{:.4}", l.norm[0]),
                format!("{:.4}", l.norm[l.norm.len() - 1]),
            ]
        })
        .collect();
    Ok(format!(
        "Filter response gain at lambda = {} and {} ({} points)\n{}",
        grid.lambda_min,
        grid.lambda_max,
        grid.points,
        table::render(&console_header, &console_rows)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_are_exact() {
        let v = Grid { points: 7, lambda_min: 0.0, lambda_max: 2.0 }.values().unwrap();
        assert_eq!(v.len(), 7);
        assert_eq!((v[0], v[6]), (0.0, 2.0));
        assert!(Grid { points: 1, ..Grid::default() }.values().is_err());
    }
}
