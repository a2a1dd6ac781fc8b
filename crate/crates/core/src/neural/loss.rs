use crate::error::{ensure_len, Error, Result};

use super::sigmoid;

/// Mean binary cross-entropy on logits, `max(z,0) − z·y + ln(1 + e^{−|z|})`.
///
/// Returns the loss and `∂loss/∂z = (σ(z) − y)/N`.
pub fn bce_with_logits(logits: &[f64], labels: &[u8]) -> Result<(f64, Vec<f64>)> {
    if logits.is_empty() {
        return Err(Error::InvalidArgument("bce_with_logits on an empty batch".into()));
    }
    ensure_len("bce_with_logits labels", logits.len(), labels.len())?;
    if let Some(bad) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::InvalidArgument(format!("label {bad} is not binary")));
    }
    let n = logits.len() as f64;
    let mut total = 0.0;
    let grads = logits
        .iter()
        .zip(labels)
        .map(|(&z, &y)| {
            let y = y as f64;
            total += z.max(0.0) - z * y + (-z.abs()).exp().ln_1p();
            (sigmoid(z) - y) / n
        })
        .collect();
    Ok((total / n, grads))
}
