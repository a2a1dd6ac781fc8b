//! JSON checkpoints holding a model's configuration and named parameter tensors.
//!
//! Floats are printed in shortest round-trip form and parsed back exactly, so
//! a saved model reloads bit-for-bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::error::{Error, Result};
use crate::hybrid::{Model, ModelKind, ModelSpec};
use crate::params::{NamedTensor, Parameters};

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// A model snapshot together with the run settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub spec: ModelSpec,
    pub config: TrainConfig,
    /// Epoch the snapshot was taken after (0 = untrained).
    pub epoch: usize,
    pub val_loss: f64,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format_version: u32,
    model_kind: ModelKind,
    spec: ModelSpec,
    config: TrainConfig,
    epoch: usize,
    val_loss: f64,
    tensors: Vec<NamedTensor>,
}

#[derive(Deserialize)]
struct Header {
    format_version: u32,
    model_kind: String,
}

impl Checkpoint {
    pub fn to_json(&self) -> Result<String> {
        let file = CheckpointFile {
            format_version: CHECKPOINT_FORMAT_VERSION,
            model_kind: self.model.kind(),
            spec: self.spec,
            config: self.config.clone(),
            epoch: self.epoch,
            val_loss: self.val_loss,
            tensors: self.model.named_tensors(),
        };
        Ok(serde_json::to_string(&file)? + "\n")
    }

    /// Parses a checkpoint, requiring `expected` kind when given.
    pub fn from_json(text: &str, expected: Option<ModelKind>) -> Result<Self> {
        let header: Header = serde_json::from_str(text).map_err(|e| Error::CheckpointParse(e.to_string()))?;
        if header.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::CheckpointVersion {
                found: header.format_version,
                expected: CHECKPOINT_FORMAT_VERSION,
            });
        }
        if let Some(kind) = expected {
            if header.model_kind != kind.to_string() {
                return Err(Error::CheckpointKind {
                    found: header.model_kind,
                    expected: kind.to_string(),
                });
            }
        }
        let file: CheckpointFile = serde_json::from_str(text).map_err(|e| Error::CheckpointParse(e.to_string()))?;
        if file.spec.kind != file.model_kind {
            return Err(Error::CheckpointParse(format!(
                "model_kind {} disagrees with spec kind {}",
                file.model_kind, file.spec.kind
            )));
        }
        let mut model = Model::zeros(&file.spec).map_err(|e| Error::CheckpointParse(e.to_string()))?;
        model.load_named(&file.tensors)?;
        Ok(Self {
            model,
            spec: file.spec,
            config: file.config,
            epoch: file.epoch,
            val_loss: file.val_loss,
        })
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, checkpoint.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>, expected: Option<ModelKind>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_json(&text, expected)
}
