use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hybrid::{ModelKind, ModelSpec};

/// Training hyperparameters and architecture sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub clip_norm: f64,
    pub n_qubits: usize,
    /// Entangling layers in the variational circuit.
    pub n_layers: usize,
    pub hidden_size: usize,
    pub dropout: f64,
    pub seed: u64,
    pub model_kind: ModelKind,
    /// Stacked LSTM layers; `None` means 1 for the hybrid model and 2 for the baseline.
    pub lstm_layers: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 80,
            batch_size: 32,
            lr: 0.001,
            weight_decay: 1e-4,
            clip_norm: 5.0,
            n_qubits: 10,
            n_layers: 2,
            hidden_size: 32,
            dropout: 0.3,
            seed: 0,
            model_kind: ModelKind::Hybrid,
            lstm_layers: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("{what} (config: {self:?})")));
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return bad("lr must be positive");
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad("weight_decay must be non-negative");
        }
        if !(self.clip_norm.is_finite() && self.clip_norm > 0.0) {
            return bad("clip_norm must be positive");
        }
        if self.lstm_layers == Some(0) {
            return bad("lstm_layers must be positive");
        }
        self.model_spec(1).validate()
    }

    pub fn lstm_layers(&self) -> usize {
        self.lstm_layers.unwrap_or(match self.model_kind {
            ModelKind::Hybrid => 1,
            ModelKind::Baseline => 2,
        })
    }

    pub fn model_spec(&self, input_size: usize) -> ModelSpec {
        ModelSpec {
            kind: self.model_kind,
            input_size,
            hidden_size: self.hidden_size,
            lstm_layers: self.lstm_layers(),
            n_qubits: self.n_qubits,
            vqc_layers: self.n_layers,
            dropout: self.dropout,
        }
    }

    /// Sets one field from its `key=value` spelling (keys match the CLI flags,
    /// with `-` or `_`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value {value:?} for {key}")))
        }
        match key.replace('-', "_").as_str() {
            "epochs" => self.epochs = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "weight_decay" => self.weight_decay = parse(key, value)?,
            "clip_norm" => self.clip_norm = parse(key, value)?,
            "qubits" | "n_qubits" => self.n_qubits = parse(key, value)?,
            "layers" | "n_layers" => self.n_layers = parse(key, value)?,
            "hidden" | "hidden_size" => self.hidden_size = parse(key, value)?,
            "dropout" => self.dropout = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "lstm_layers" => self.lstm_layers = Some(parse(key, value)?),
            "model" | "model_kind" => {
                self.model_kind = match value {
                    "hybrid" => ModelKind::Hybrid,
                    "baseline" => ModelKind::Baseline,
                    _ => return Err(Error::InvalidArgument(format!("unknown model kind {value:?}"))),
                }
            }
            _ => return Err(Error::InvalidArgument(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
        .map(|(i, line)| {
            line.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::InvalidArgument(format!("config line {}: expected key=value", i + 1)))
        })
        .collect()
}
