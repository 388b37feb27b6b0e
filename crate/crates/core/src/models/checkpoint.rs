use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelConfig, ModelParams};
use crate::error::{read_file, Error, Result};
use crate::linalg::DenseMatrix;

pub const CHECKPOINT_FORMAT: &str = "hybspec-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub value: DenseMatrix,
}

/// JSON checkpoint: versioned header, config echo and named tensors in
/// parameter order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config: ModelConfig,
    pub num_features: usize,
    pub num_classes: usize,
    pub params: Vec<NamedTensor>,
}

impl Checkpoint {
    pub fn from_model(config: &ModelConfig, model: &ModelParams) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            config: config.clone(),
            num_features: model.num_features,
            num_classes: model.num_classes,
            params: model
                .params
                .iter()
                .map(|p| NamedTensor { name: p.name.clone(), value: p.value.clone() })
                .collect(),
        }
    }

    /// Rebuilds the model: layout from the config, values from the tensors.
    pub fn to_model(&self) -> Result<(ModelConfig, ModelParams)> {
        self.check_header()?;
        let mut model = ModelParams::init(&self.config, self.num_features, self.num_classes, 0)?;
        if model.params.len() != self.params.len() {
            return Err(Error::Checkpoint(format!(
                "config implies {} tensors, checkpoint has {}",
                model.params.len(),
                self.params.len()
            )));
        }
        for (p, t) in model.params.iter_mut().zip(&self.params) {
            if p.name != t.name || p.value.shape() != t.value.shape() {
                return Err(Error::Checkpoint(format!(
                    "tensor {:?} {:?} does not match expected {:?} {:?}",
                    t.name,
                    t.value.shape(),
                    p.name,
                    p.value.shape()
                )));
            }
            p.value = t.value.clone();
        }
        Ok((self.config.clone(), model))
    }

    fn check_header(&self) -> Result<()> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unknown format {:?}", self.format)));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", self.version)));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ck: Self = serde_json::from_str(&read_file(path)?)?;
        ck.check_header()?;
        Ok(ck)
    }
}
