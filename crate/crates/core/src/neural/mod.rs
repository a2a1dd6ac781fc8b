//! Classical layers with hand-written forward and backward passes.

pub mod dense;
pub mod dropout;
pub mod loss;
pub mod lstm;
pub mod optim;

pub use dense::DenseLayer;
pub use dropout::{dropout, dropout_mask};
pub use loss::bce_with_logits;
pub use lstm::{LstmCache, LstmState, LstmWeights};
pub use optim::{clip_grad_norm, Adam};

use ndarray::Array2;
use rand::Rng;

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Glorot/Xavier uniform init for a `rows × cols` weight (`fan_out × fan_in`).
pub fn glorot_uniform(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit))
}
