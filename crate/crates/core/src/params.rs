//! Flat views over model parameters.
//!
//! Every trainable component exposes its tensors in a fixed order through
//! [`Parameters`]. The optimizer, gradient clipping and checkpointing all work
//! on the flattened vector built from that order, so a gradient set that
//! mirrors its model's layout flattens to matching indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub trait Parameters {
    /// Calls `f(name, shape, data)` for every tensor, in a fixed order.
    fn for_each_tensor(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64]));

    /// Same order as [`Parameters::for_each_tensor`].
    fn for_each_tensor_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64]));

    fn n_params(&self) -> usize {
        let mut n = 0;
        self.for_each_tensor("", &mut |_, _, d| n += d.len());
        n
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        self.for_each_tensor("", &mut |_, _, d| out.extend_from_slice(d));
        out
    }

    /// Overwrites every parameter from a flat vector produced by [`Parameters::flatten`].
    fn assign_flat(&mut self, flat: &[f64]) -> Result<()> {
        let expected = self.n_params();
        if flat.len() != expected {
            return Err(Error::shape("Parameters::assign_flat", expected, flat.len()));
        }
        let mut offset = 0;
        self.for_each_tensor_mut("", &mut |_, d| {
            d.copy_from_slice(&flat[offset..offset + d.len()]);
            offset += d.len();
        });
        Ok(())
    }

    fn named_tensors(&self) -> Vec<NamedTensor> {
        let mut out = Vec::new();
        self.for_each_tensor("", &mut |name, shape, data| {
            out.push(NamedTensor {
                name: name.to_string(),
                shape: shape.to_vec(),
                data: data.to_vec(),
            })
        });
        out
    }

    /// Loads tensors by name; every tensor must be present with a matching shape.
    fn load_named(&mut self, tensors: &[NamedTensor]) -> Result<()> {
        let mut expected = Vec::new();
        self.for_each_tensor("", &mut |name, shape, _| expected.push((name.to_string(), shape.to_vec())));
        if tensors.len() != expected.len() {
            return Err(Error::CheckpointTensor {
                name: "*".into(),
                message: format!("expected {} tensors, found {}", expected.len(), tensors.len()),
            });
        }
        for ((name, shape), t) in expected.iter().zip(tensors) {
            if &t.name != name {
                return Err(Error::CheckpointTensor {
                    name: t.name.clone(),
                    message: format!("expected tensor {name} at this position"),
                });
            }
            if &t.shape != shape || t.data.len() != shape.iter().product::<usize>() {
                return Err(Error::CheckpointTensor {
                    name: name.clone(),
                    message: format!("shape {:?} with {} values, expected {:?}", t.shape, t.data.len(), shape),
                });
            }
            if t.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::CheckpointTensor {
                    name: name.clone(),
                    message: "non-finite value".into(),
                });
            }
        }
        let mut iter = tensors.iter();
        self.for_each_tensor_mut("", &mut |_, d| {
            let t = iter.next().expect("tensor count checked above");
            d.copy_from_slice(&t.data);
        });
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

pub(crate) fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}
