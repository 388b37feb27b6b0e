//! Subcommand implementations. Each writes its files under the output
//! directory and returns the text printed to the console.

pub mod ablation;
pub mod gen_sbm;
pub mod poison;
pub mod response;
pub mod train;
pub mod unified;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Command, ExperimentConfig};
use crate::error::{io_err, Result};

/// Flags shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Globals {
    pub config: Option<PathBuf>,
    /// Overrides the config's root seed.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
}

impl Globals {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self { config: None, seed: None, out_dir: out_dir.into(), jobs: None }
    }

    pub fn load(&self, cmd: Command) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(cmd, self.config.as_deref())?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }

    fn ensure_out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out_dir).map_err(io_err(&self.out_dir))?;
        Ok(&self.out_dir)
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    // RFC 4180: CRLF line ends, fields quoted only when needed
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(io_err(path))
}

/// Shortest round-trip text of `v`; empty for non-finite values.
fn num(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}
