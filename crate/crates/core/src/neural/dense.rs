use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;

use crate::error::{ensure_len, Result};
use crate::params::{join, Parameters};

/// Fully connected layer `y = W x + b`, `W` stored `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weight: Array2::zeros((out_dim, in_dim)),
            bias: Array1::zeros(out_dim),
        }
    }

    pub fn glorot(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        Self {
            weight: super::glorot_uniform(out_dim, in_dim, rng),
            bias: Array1::zeros(out_dim),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn forward(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        ensure_len("dense forward input", self.in_dim(), x.len())?;
        Ok(self.weight.dot(&x) + &self.bias)
    }

    /// Returns the parameter gradient (shaped like `self`) and `dx = Wᵀ·dout`.
    pub fn backward(&self, x: ArrayView1<f64>, dout: ArrayView1<f64>) -> Result<(DenseLayer, Array1<f64>)> {
        ensure_len("dense backward input", self.in_dim(), x.len())?;
        ensure_len("dense backward upstream", self.out_dim(), dout.len())?;
        let mut grad = DenseLayer::zeros(self.in_dim(), self.out_dim());
        for (mut row, &d) in grad.weight.rows_mut().into_iter().zip(dout.iter()) {
            row.scaled_add(d, &x);
        }
        grad.bias.assign(&dout);
        let dx = self.weight.t().dot(&dout);
        Ok((grad, dx))
    }
}

impl Parameters for DenseLayer {
    fn for_each_tensor(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        f(&join(prefix, "weight"), self.weight.shape(), self.weight.as_slice().unwrap());
        f(&join(prefix, "bias"), self.bias.shape(), self.bias.as_slice().unwrap());
    }

    fn for_each_tensor_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        f(&join(prefix, "weight"), self.weight.as_slice_mut().unwrap());
        f(&join(prefix, "bias"), self.bias.as_slice_mut().unwrap());
    }
}
