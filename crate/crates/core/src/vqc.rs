//! Variational quantum circuit layer.
//!
//! The circuit is: RY angle embedding of the input features, `n_layers`
//! strongly entangling layers (a Rot on every wire followed by a CNOT ring
//! `i -> (i+1) mod n`), then ⟨Z⟩ on every wire.
//!
//! Gradients use the parameter-shift rule at ±π/2. Every angle in the
//! circuit, including the embedding angles, drives a Pauli rotation, so the
//! shift formula is exact rather than a finite-difference estimate.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::qsim::{StateVector, MAX_QUBITS};

pub const MAX_LAYERS: usize = 8;

const SHIFT: f64 = FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VqcConfig {
    pub n_qubits: usize,
    pub n_layers: usize,
}

impl VqcConfig {
    pub fn new(n_qubits: usize, n_layers: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::InvalidArgument(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        if !(1..=MAX_LAYERS).contains(&n_layers) {
            return Err(Error::InvalidArgument(format!(
                "n_layers must be in 1..={MAX_LAYERS}, got {n_layers}"
            )));
        }
        Ok(Self { n_qubits, n_layers })
    }

    /// Number of trainable rotation angles, `3 · n_layers · n_qubits`.
    pub fn n_params(&self) -> usize {
        3 * self.n_layers * self.n_qubits
    }

    /// Circuit evaluations performed by one [`backward`] call.
    pub fn evaluations_per_backward(&self) -> usize {
        2 * (self.n_params() + self.n_qubits)
    }
}

/// Rot angles `(α, β, γ)` indexed `[layer][qubit]`.
#[derive(Debug, Clone, PartialEq)]
pub struct VqcParams {
    cfg: VqcConfig,
    angles: Vec<[f64; 3]>,
}

impl VqcParams {
    pub fn zeros(cfg: VqcConfig) -> Self {
        Self {
            cfg,
            angles: vec![[0.0; 3]; cfg.n_layers * cfg.n_qubits],
        }
    }

    /// Angles drawn uniformly from `[0, 2π)`.
    pub fn random(cfg: VqcConfig, rng: &mut impl Rng) -> Self {
        let angles = (0..cfg.n_layers * cfg.n_qubits)
            .map(|_| [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)])
            .collect();
        Self { cfg, angles }
    }

    /// Builds parameters from a flat `[layer][qubit][3]` vector.
    pub fn from_flat(cfg: VqcConfig, flat: &[f64]) -> Result<Self> {
        ensure_len("VqcParams::from_flat", cfg.n_params(), flat.len())?;
        if let Some(bad) = flat.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite circuit angle {bad}")));
        }
        let angles = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Self { cfg, angles })
    }

    pub fn config(&self) -> VqcConfig {
        self.cfg
    }

    pub fn layer(&self, layer: usize) -> &[[f64; 3]] {
        let n = self.cfg.n_qubits;
        &self.angles[layer * n..(layer + 1) * n]
    }

    pub fn as_flat(&self) -> &[f64] {
        self.angles.as_flattened()
    }

    pub fn as_flat_mut(&mut self) -> &mut [f64] {
        self.angles.as_flattened_mut()
    }
}

/// Encodes `x` as `RY(x_i)` on wire `i`.
pub fn angle_embedding(state: &mut StateVector, x: &[f64]) -> Result<()> {
    ensure_len("angle_embedding", state.n_qubits(), x.len())?;
    for (q, &angle) in x.iter().enumerate() {
        state.ry(q, angle)?;
    }
    Ok(())
}

/// One Rot on every wire, then the CNOT ring. A single wire has no ring.
pub fn entangling_layer(state: &mut StateVector, layer_angles: &[[f64; 3]]) -> Result<()> {
    let n = state.n_qubits();
    ensure_len("entangling_layer", n, layer_angles.len())?;
    for (q, &[a, b, c]) in layer_angles.iter().enumerate() {
        state.rot(q, a, b, c)?;
    }
    if n > 1 {
        for q in 0..n {
            state.cnot(q, (q + 1) % n)?;
        }
    }
    Ok(())
}

fn run_circuit(x: &[f64], params: &VqcParams) -> Result<Vec<f64>> {
    let cfg = params.cfg;
    let mut state = StateVector::new(cfg.n_qubits)?;
    angle_embedding(&mut state, x)?;
    for layer in 0..cfg.n_layers {
        entangling_layer(&mut state, params.layer(layer))?;
    }
    Ok(state.expect_z_all())
}

/// Measurement vector `q⃗`, one ⟨Z⟩ per wire.
pub fn forward(x: &[f64], params: &VqcParams) -> Result<Vec<f64>> {
    ensure_len("vqc::forward input", params.cfg.n_qubits, x.len())?;
    run_circuit(x, params)
}

#[derive(Debug, Clone)]
pub struct VqcGradient {
    pub params: VqcParams,
    pub inputs: Vec<f64>,
    /// Circuit evaluations spent computing this gradient.
    pub evaluations: usize,
}

/// Parameter-shift gradients of `Σ_i upstream_i · q_i` with respect to every
/// circuit angle and every embedded input.
pub fn backward(x: &[f64], params: &VqcParams, upstream: &[f64]) -> Result<VqcGradient> {
    let n = params.cfg.n_qubits;
    ensure_len("vqc::backward input", n, x.len())?;
    ensure_len("vqc::backward upstream", n, upstream.len())?;

    let mut evaluations = 0;
    let mut shifted = |x: &[f64], p: &VqcParams| -> Result<f64> {
        evaluations += 1;
        let q = run_circuit(x, p)?;
        Ok(q.iter().zip(upstream).map(|(q, u)| q * u).sum())
    };

    let mut grad_x = vec![0.0; n];
    let mut xs = x.to_vec();
    for i in 0..n {
        xs[i] = x[i] + SHIFT;
        let plus = shifted(&xs, params)?;
        xs[i] = x[i] - SHIFT;
        let minus = shifted(&xs, params)?;
        xs[i] = x[i];
        grad_x[i] = (plus - minus) / 2.0;
    }

    let mut grad_p = VqcParams::zeros(params.cfg);
    let mut ps = params.clone();
    for j in 0..params.cfg.n_params() {
        let orig = params.as_flat()[j];
        ps.as_flat_mut()[j] = orig + SHIFT;
        let plus = shifted(x, &ps)?;
        ps.as_flat_mut()[j] = orig - SHIFT;
        let minus = shifted(x, &ps)?;
        ps.as_flat_mut()[j] = orig;
        grad_p.as_flat_mut()[j] = (plus - minus) / 2.0;
    }

    Ok(VqcGradient {
        params: grad_p,
        inputs: grad_x,
        evaluations,
    })
}
