//! Plain-text graph files.
//!
//! * edge list: one whitespace-separated pair of node indices per line,
//!   `#` starts a comment. Edges are symmetrized, deduplicated, and
//!   self-loops are dropped.
//! * features: one row per node, `F` floats followed by an integer label.
//! * masks (optional): JSON object `{"train": [..], "val": [..], "test": [..]}`
//!   of node indices.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Graph, Split};
use crate::error::{read_file, Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};

#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    /// When set, labels must be below this; otherwise it is `max label + 1`.
    pub num_classes: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MaskFile {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

pub fn load_graph(edges: &Path, features: &Path, masks: Option<&Path>, opts: &LoadOptions) -> Result<Graph> {
    let feat_text = read_file(features)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut width: Option<usize> = None;
    for (line_no, line) in content_lines(&feat_text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (label_tok, value_toks) = fields.split_last().expect("line is non-empty");
        if width.is_some_and(|w| w != value_toks.len()) {
            return Err(parse_err(
                features,
                line_no,
                format!("expected {} features, found {}", width.unwrap_or(0), value_toks.len()),
            ));
        }
        width = Some(value_toks.len());
        let row = value_toks
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(features, line_no, format!("bad feature value {t:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        let label: usize = label_tok
            .parse()
            .map_err(|_| parse_err(features, line_no, format!("bad label {label_tok:?}")))?;
        if let Some(c) = opts.num_classes {
            if label >= c {
                return Err(parse_err(features, line_no, format!("label {label} out of range 0..{c}")));
            }
        }
        rows.push(row);
        labels.push(label);
    }
    let n = rows.len();
    let f = width.unwrap_or(0);
    let num_classes = opts
        .num_classes
        .unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
    let feature_matrix = DenseMatrix::new(n, f, rows.into_iter().flatten().collect())?;

    let edge_text = read_file(edges)?;
    let mut triplets = Vec::new();
    for (line_no, line) in content_lines(&edge_text) {
        let mut toks = line.split_whitespace();
        let node = |toks: &mut std::str::SplitWhitespace| -> Result<usize> {
            let tok = toks.next().ok_or_else(|| parse_err(edges, line_no, "expected two node indices"))?;
            let v: usize = tok
                .parse()
                .map_err(|_| parse_err(edges, line_no, format!("bad node index {tok:?}")))?;
            if v >= n {
                return Err(parse_err(edges, line_no, format!("node {v} out of range for {n} nodes")));
            }
            Ok(v)
        };
        let u = node(&mut toks)?;
        let v = node(&mut toks)?;
        if toks.next().is_some() {
            return Err(parse_err(edges, line_no, "trailing fields after edge"));
        }
        if u != v {
            triplets.push((u, v, 1.0));
            triplets.push((v, u, 1.0));
        }
    }
    let mut adjacency = CsrMatrix::from_triplets(n, triplets)?;
    // duplicates were summed; collapse back to a binary adjacency
    if adjacency.vals().iter().any(|&v| v != 1.0) {
        adjacency = CsrMatrix::new(
            n,
            adjacency.row_ptr().to_vec(),
            adjacency.col_idx().to_vec(),
            vec![1.0; adjacency.nnz()],
        )?;
    }

    let split = match masks {
        Some(path) => {
            let file: MaskFile = serde_json::from_str(&read_file(path)?)?;
            Some(Split::from_indices(n, &file.train, &file.val, &file.test)?)
        }
        None => None,
    };
    Graph::new(adjacency, feature_matrix, labels, num_classes, split)
}

/// Writes `edges.txt`, `features.txt` and (when a split exists) `masks.json`
/// into `dir`. Floats use Rust's shortest round-trip formatting.
pub fn write_graph(g: &Graph, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut edges = String::new();
    for r in 0..g.n() {
        for (c, _) in g.adjacency().row(r) {
            if r < c {
                writeln!(edges, "{r} {c}").expect("writing to String");
            }
        }
    }
    fs::write(dir.join("edges.txt"), edges)?;

    let mut feats = String::new();
    for r in 0..g.n() {
        for v in g.features().row(r) {
            write!(feats, "{v} ").expect("writing to String");
        }
        writeln!(feats, "{}", g.labels()[r]).expect("writing to String");
    }
    fs::write(dir.join("features.txt"), feats)?;

    if let Some(s) = g.split() {
        let file = MaskFile {
            train: Split::indices(&s.train),
            val: Split::indices(&s.val),
            test: Split::indices(&s.test),
        };
        fs::write(dir.join("masks.json"), serde_json::to_string_pretty(&file)?)?;
    }
    Ok(())
}
