//! JSON experiment configuration.
//!
//! A config file is a JSON object; any top-level key left out takes the
//! value from the command's built-in default (see [`ExperimentConfig::default_for`]).
//! Relative dataset paths resolve against the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use hybspec::graph::{SbmConfig, SplitRatios};
use hybspec::models::{ModelConfig, Variant};
use hybspec::trainer::{AdamConfig, Selection};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{io_err, CliError, Result};

/// Degrees swept by `k-ablation` by default.
pub const DEFAULT_K_LIST: [usize; 9] = [2, 3, 5, 7, 10, 15, 20, 25, 30];

/// Initial pre-sigmoid Krawtchouk shape for the poisoning experiments
/// (`p ≈ 1.1e-7`).
pub const POISON_RAW_P: f64 = -16.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// 200 epochs.
    Homophilic,
    /// 400 epochs.
    Heterophilic,
}

impl Protocol {
    pub fn epochs(self) -> usize {
        match self {
            Protocol::Homophilic => 200,
            Protocol::Heterophilic => 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSpec {
    pub edges: PathBuf,
    pub features: PathBuf,
    #[serde(default)]
    pub masks: Option<PathBuf>,
    #[serde(default)]
    pub num_classes: Option<usize>,
}

/// One dataset: either a synthetic SBM (its `seed` is replaced by one
/// derived from the root seed) or graph files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(default)]
    pub sbm: Option<SbmConfig>,
    #[serde(default)]
    pub files: Option<FileSpec>,
    pub protocol: Protocol,
    /// Number of random stratified splits; `None` uses the dataset's own
    /// split (or one random split when it has none).
    #[serde(default)]
    pub folds: Option<usize>,
    /// Overrides the protocol's epoch count.
    #[serde(default)]
    pub epochs: Option<usize>,
}

impl DatasetSpec {
    pub fn sbm(name: &str, sbm: SbmConfig, protocol: Protocol, folds: Option<usize>) -> Self {
        Self {
            name: name.into(),
            sbm: Some(sbm),
            files: None,
            protocol,
            folds,
            epochs: None,
        }
    }

    pub fn epochs(&self) -> usize {
        self.epochs.unwrap_or_else(|| self.protocol.epochs())
    }

    fn validate(&self) -> Result<()> {
        match (&self.sbm, &self.files) {
            (Some(s), None) => s.validate()?,
            (None, Some(_)) => {}
            _ => {
                return Err(CliError::Config(format!(
                    "dataset {:?} needs exactly one of \"sbm\" or \"files\"",
                    self.name
                )))
            }
        }
        if self.folds.is_some_and(|f| f < 2) {
            return Err(CliError::Config(format!("dataset {:?}: folds must be at least 2", self.name)));
        }
        if self.epochs == Some(0) {
            return Err(CliError::Config(format!("dataset {:?}: epochs must be at least 1", self.name)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Unified,
    KAblation,
    PoisonDemo,
    Response,
    GenSbm,
    Train,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Root seed; `--seed` overrides it.
    pub seed: u64,
    /// Independent repetitions (graph, splits and init all re-drawn).
    pub repeats: usize,
    pub datasets: Vec<DatasetSpec>,
    pub variants: Vec<Variant>,
    /// Template for every model; `variant` and `k` are set per cell.
    pub model: ModelConfig,
    pub adam: AdamConfig,
    pub selection: Selection,
    pub split_ratios: SplitRatios,
    /// Degrees swept by `k-ablation`.
    pub k_list: Vec<usize>,
}

fn unified_datasets() -> Vec<DatasetSpec> {
    vec![
        DatasetSpec::sbm("sbm_heterophilic", SbmConfig { h: 0.1, ..Default::default() }, Protocol::Heterophilic, Some(10)),
        DatasetSpec::sbm("sbm_homophilic", SbmConfig { h: 0.9, ..Default::default() }, Protocol::Homophilic, Some(10)),
    ]
}

/// Three balanced classes, so a collapsed run scores about 33.33%.
pub fn poison_dataset() -> DatasetSpec {
    DatasetSpec::sbm("sbm_3class", SbmConfig { c: 3, h: 0.8, ..Default::default() }, Protocol::Homophilic, None)
}

impl ExperimentConfig {
    pub fn default_for(cmd: Command) -> Self {
        let base = Self {
            seed: 0,
            repeats: 1,
            datasets: unified_datasets(),
            variants: Variant::ALL.to_vec(),
            model: ModelConfig::default(),
            adam: AdamConfig::default(),
            selection: Selection::default(),
            split_ratios: SplitRatios::default(),
            k_list: DEFAULT_K_LIST.to_vec(),
        };
        match cmd {
            Command::Unified | Command::GenSbm => base,
            Command::KAblation | Command::PoisonDemo => Self {
                datasets: vec![poison_dataset()],
                model: ModelConfig { raw_p_init: POISON_RAW_P, ..ModelConfig::default() },
                ..base
            },
            Command::Train | Command::Response => Self {
                datasets: vec![unified_datasets().remove(0)],
                variants: vec![Variant::HybV4],
                ..base
            },
        }
    }

    /// Command default overlaid with the keys present in `json`.
    pub fn from_json(cmd: Command, json: &str) -> Result<Self> {
        let user: Value = serde_json::from_str(json)?;
        let Value::Object(user) = user else {
            return Err(CliError::Config("top level must be a JSON object".into()));
        };
        let mut merged = serde_json::to_value(Self::default_for(cmd))?;
        let obj = merged.as_object_mut().expect("config serializes to an object");
        for (k, v) in user {
            if !obj.contains_key(&k) {
                return Err(CliError::Config(format!("unknown key {k:?}")));
            }
            obj.insert(k, v);
        }
        let cfg: Self = serde_json::from_value(merged)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `path` (or the command default when `None`) and resolves
    /// relative dataset paths against the file's directory.
    pub fn load(cmd: Command, path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default_for(cmd));
        };
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg = Self::from_json(cmd, &text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut cfg.datasets {
            if let Some(f) = &mut d.files {
                for p in [&mut f.edges, &mut f.features] {
                    if p.is_relative() {
                        *p = base.join(&*p);
                    }
                }
                if let Some(m) = f.masks.as_mut().filter(|m| m.is_relative()) {
                    *m = base.join(&*m);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(CliError::Config("repeats must be at least 1".into()));
        }
        if self.variants.is_empty() {
            return Err(CliError::Config("no model variants given".into()));
        }
        if self.k_list.contains(&0) {
            return Err(CliError::Config("k_list entries must be at least 1".into()));
        }
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Config("dataset names must be unique".into()));
        }
        self.model.validate()?;
        self.split_ratios.validate()?;
        self.datasets.iter().try_for_each(DatasetSpec::validate)
    }
}
