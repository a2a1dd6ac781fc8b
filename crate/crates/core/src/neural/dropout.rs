use ndarray::{Array1, ArrayView1};
use rand::Rng;

use crate::error::{Error, Result};

fn check_rate(rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("dropout rate must be in [0, 1), got {rate}")))
    }
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise `1/(1-rate)`.
pub fn dropout_mask(len: usize, rate: f64, rng: &mut (impl Rng + ?Sized)) -> Result<Array1<f64>> {
    check_rate(rate)?;
    if rate == 0.0 {
        return Ok(Array1::ones(len));
    }
    let keep = 1.0 / (1.0 - rate);
    Ok(Array1::from_shape_simple_fn(len, || {
        if rng.random::<f64>() < rate {
            0.0
        } else {
            keep
        }
    }))
}

/// Returns `(y, mask)`. Outside training the input passes through untouched
/// and the mask is all ones.
pub fn dropout(x: ArrayView1<f64>, rate: f64, training: bool, rng: &mut (impl Rng + ?Sized)) -> Result<(Array1<f64>, Array1<f64>)> {
    check_rate(rate)?;
    if !training {
        return Ok((x.to_owned(), Array1::ones(x.len())));
    }
    let mask = dropout_mask(x.len(), rate, rng)?;
    Ok((&x * &mask, mask))
}
