use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};

/// Columns whose standard deviation falls below this are treated as constant.
pub const DEGENERATE_STD: f64 = 1e-12;

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Constant columns get σ = 1 so they normalize to zero.
    pub fn fit(features: ArrayView2<f64>) -> Result<Self> {
        if features.nrows() < 2 {
            return Err(Error::InvalidArgument(format!(
                "normalization needs at least 2 rows, got {}",
                features.nrows()
            )));
        }
        let n = features.nrows() as f64;
        let mut mean = Vec::with_capacity(features.ncols());
        let mut std = Vec::with_capacity(features.ncols());
        for col in features.axis_iter(Axis(1)) {
            let mu = col.sum() / n;
            let var = col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
            let sigma = var.sqrt();
            mean.push(mu);
            std.push(if sigma < DEGENERATE_STD { 1.0 } else { sigma });
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, features: ArrayView2<f64>) -> Result<Array2<f64>> {
        ensure_len("normalization columns", self.mean.len(), features.ncols())?;
        let mut out = features.to_owned();
        for (mut col, (mu, sigma)) in out.axis_iter_mut(Axis(1)).zip(self.mean.iter().zip(&self.std)) {
            col.mapv_inplace(|v| (v - mu) / sigma);
        }
        Ok(out)
    }
}
