//! Stacked LSTM with backpropagation through time.
//!
//! Per layer and time step:
//!
//! ```text
//! i_t = σ(W_i x_t + U_i h_{t−1} + b_i)
//! f_t = σ(W_f x_t + U_f h_{t−1} + b_f)
//! c̃_t = tanh(W_C x_t + U_C h_{t−1} + b_C)
//! C_t = f_t ⊙ C_{t−1} + i_t ⊙ c̃_t
//! o_t = σ(W_o x_t + U_o h_{t−1} + b_o)
//! h_t = o_t ⊙ tanh(C_t)
//! ```
//!
//! Layer `k + 1` consumes the hidden sequence of layer `k`, optionally through
//! an inverted-dropout mask.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

use crate::error::{ensure_len, Error, Result};
use crate::params::{join, Parameters};

use super::{glorot_uniform, sigmoid};

/// Input weight `w` (`hidden × in`), recurrent weight `u` (`hidden × hidden`), bias `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateWeights {
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub b: Array1<f64>,
}

impl GateWeights {
    fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w: Array2::zeros((hidden, input)),
            u: Array2::zeros((hidden, hidden)),
            b: Array1::zeros(hidden),
        }
    }

    fn glorot(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        Self {
            w: glorot_uniform(hidden, input, rng),
            u: glorot_uniform(hidden, hidden, rng),
            b: Array1::zeros(hidden),
        }
    }

    fn preactivation(&self, x: ArrayView1<f64>, h: ArrayView1<f64>) -> Array1<f64> {
        self.w.dot(&x) + self.u.dot(&h) + &self.b
    }

    fn accumulate(&mut self, da: &Array1<f64>, x: ArrayView1<f64>, h_prev: ArrayView1<f64>) {
        for (r, &d) in da.iter().enumerate() {
            if d != 0.0 {
                self.w.row_mut(r).scaled_add(d, &x);
                self.u.row_mut(r).scaled_add(d, &h_prev);
            }
        }
        self.b += da;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    pub input_gate: GateWeights,
    pub forget_gate: GateWeights,
    pub candidate: GateWeights,
    pub output_gate: GateWeights,
}

impl LstmLayer {
    fn gates(&self) -> [(&'static str, &GateWeights); 4] {
        [
            ("input_gate", &self.input_gate),
            ("forget_gate", &self.forget_gate),
            ("candidate", &self.candidate),
            ("output_gate", &self.output_gate),
        ]
    }

    fn gates_mut(&mut self) -> [(&'static str, &mut GateWeights); 4] {
        [
            ("input_gate", &mut self.input_gate),
            ("forget_gate", &mut self.forget_gate),
            ("candidate", &mut self.candidate),
            ("output_gate", &mut self.output_gate),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmWeights {
    pub layers: Vec<LstmLayer>,
    input_size: usize,
    hidden_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Array1<f64>,
    pub c: Array1<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: Array1::zeros(hidden),
            c: Array1::zeros(hidden),
        }
    }
}

#[derive(Debug, Clone)]
struct StepCache {
    x: Array1<f64>,
    h_prev: Array1<f64>,
    c_prev: Array1<f64>,
    i: Array1<f64>,
    f: Array1<f64>,
    g: Array1<f64>,
    o: Array1<f64>,
    tanh_c: Array1<f64>,
}

/// Everything [`LstmWeights::backward`] needs from a forward call.
#[derive(Debug, Clone)]
pub struct LstmCache {
    steps: Vec<Vec<StepCache>>,
    masks: Option<Vec<Array2<f64>>>,
    input_size: usize,
    hidden_size: usize,
}

impl LstmCache {
    pub fn seq_len(&self) -> usize {
        self.steps.first().map_or(0, Vec::len)
    }

    /// Cached `(i, f, c̃, o)` activations at `layer`, step `t`.
    pub fn gates(&self, layer: usize, t: usize) -> (&Array1<f64>, &Array1<f64>, &Array1<f64>, &Array1<f64>) {
        let s = &self.steps[layer][t];
        (&s.i, &s.f, &s.g, &s.o)
    }
}

impl LstmWeights {
    pub fn zeros(input_size: usize, hidden_size: usize, n_layers: usize) -> Self {
        let layers = (0..n_layers)
            .map(|k| {
                let inp = if k == 0 { input_size } else { hidden_size };
                LstmLayer {
                    input_gate: GateWeights::zeros(inp, hidden_size),
                    forget_gate: GateWeights::zeros(inp, hidden_size),
                    candidate: GateWeights::zeros(inp, hidden_size),
                    output_gate: GateWeights::zeros(inp, hidden_size),
                }
            })
            .collect();
        Self {
            layers,
            input_size,
            hidden_size,
        }
    }

    /// Glorot-uniform `W`/`U`, zero biases.
    pub fn glorot(input_size: usize, hidden_size: usize, n_layers: usize, rng: &mut impl Rng) -> Self {
        let layers = (0..n_layers)
            .map(|k| {
                let inp = if k == 0 { input_size } else { hidden_size };
                LstmLayer {
                    input_gate: GateWeights::glorot(inp, hidden_size, rng),
                    forget_gate: GateWeights::glorot(inp, hidden_size, rng),
                    candidate: GateWeights::glorot(inp, hidden_size, rng),
                    output_gate: GateWeights::glorot(inp, hidden_size, rng),
                }
            })
            .collect();
        Self {
            layers,
            input_size,
            hidden_size,
        }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden_size
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    /// Runs the stack from zero state without inter-layer dropout.
    pub fn forward(&self, x_seq: ArrayView2<f64>) -> Result<(Array1<f64>, LstmCache)> {
        let init = vec![LstmState::zeros(self.hidden_size); self.n_layers()];
        self.forward_from(x_seq, &init, None)
    }

    /// Full forward pass. `init` holds one starting state per layer;
    /// `masks`, when given, holds one `seq_len × hidden` multiplier per gap
    /// between consecutive layers.
    pub fn forward_from(
        &self,
        x_seq: ArrayView2<f64>,
        init: &[LstmState],
        masks: Option<&[Array2<f64>]>,
    ) -> Result<(Array1<f64>, LstmCache)> {
        let (seq_len, width) = x_seq.dim();
        if seq_len == 0 {
            return Err(Error::InvalidArgument("LSTM input sequence is empty".into()));
        }
        ensure_len("lstm input width", self.input_size, width)?;
        ensure_len("lstm initial states", self.n_layers(), init.len())?;
        for s in init {
            ensure_len("lstm initial h", self.hidden_size, s.h.len())?;
            ensure_len("lstm initial c", self.hidden_size, s.c.len())?;
        }
        if let Some(masks) = masks {
            ensure_len("lstm dropout masks", self.n_layers().saturating_sub(1), masks.len())?;
            for m in masks {
                if m.dim() != (seq_len, self.hidden_size) {
                    return Err(Error::shape(
                        "lstm dropout mask",
                        format!("{:?}", (seq_len, self.hidden_size)),
                        format!("{:?}", m.dim()),
                    ));
                }
            }
        }

        let mut layer_input = x_seq.to_owned();
        let mut steps = Vec::with_capacity(self.n_layers());
        for (k, layer) in self.layers.iter().enumerate() {
            if k > 0 {
                if let Some(masks) = masks {
                    layer_input *= &masks[k - 1];
                }
            }
            let mut h = init[k].h.clone();
            let mut c = init[k].c.clone();
            let mut outputs = Array2::zeros((seq_len, self.hidden_size));
            let mut layer_steps = Vec::with_capacity(seq_len);
            for t in 0..seq_len {
                let x = layer_input.row(t);
                let i = layer.input_gate.preactivation(x, h.view()).mapv(sigmoid);
                let f = layer.forget_gate.preactivation(x, h.view()).mapv(sigmoid);
                let g = layer.candidate.preactivation(x, h.view()).mapv(f64::tanh);
                let o = layer.output_gate.preactivation(x, h.view()).mapv(sigmoid);
                let c_next = &f * &c + &i * &g;
                let tanh_c = c_next.mapv(f64::tanh);
                let h_next = &o * &tanh_c;
                outputs.row_mut(t).assign(&h_next);
                layer_steps.push(StepCache {
                    x: x.to_owned(),
                    h_prev: std::mem::replace(&mut h, h_next),
                    c_prev: std::mem::replace(&mut c, c_next),
                    i,
                    f,
                    g,
                    o,
                    tanh_c,
                });
            }
            steps.push(layer_steps);
            layer_input = outputs;
        }

        let h_last = layer_input.row(seq_len - 1).to_owned();
        Ok((
            h_last,
            LstmCache {
                steps,
                masks: masks.map(<[_]>::to_vec),
                input_size: self.input_size,
                hidden_size: self.hidden_size,
            },
        ))
    }

    /// Gradients of `⟨dh_last, h_T⟩` with respect to every weight and every
    /// input step. The first element mirrors `self`'s layout.
    pub fn backward(&self, cache: &LstmCache, dh_last: ArrayView1<f64>) -> Result<(LstmWeights, Array2<f64>)> {
        if cache.input_size != self.input_size
            || cache.hidden_size != self.hidden_size
            || cache.steps.len() != self.n_layers()
        {
            return Err(Error::InvalidState(format!(
                "LSTM cache was built for input {} hidden {} layers {}, weights are input {} hidden {} layers {}",
                cache.input_size,
                cache.hidden_size,
                cache.steps.len(),
                self.input_size,
                self.hidden_size,
                self.n_layers()
            )));
        }
        ensure_len("lstm backward dh", self.hidden_size, dh_last.len())?;

        let seq_len = cache.seq_len();
        let hidden = self.hidden_size;
        let mut grads = LstmWeights::zeros(self.input_size, hidden, self.n_layers());

        // Upstream gradient for each step's output of the current layer.
        let mut d_out = Array2::<f64>::zeros((seq_len, hidden));
        d_out.row_mut(seq_len - 1).assign(&dh_last);

        for k in (0..self.n_layers()).rev() {
            let layer = &self.layers[k];
            let grad = &mut grads.layers[k];
            let in_width = if k == 0 { self.input_size } else { hidden };
            let mut d_in = Array2::<f64>::zeros((seq_len, in_width));
            let mut dh_rec = Array1::<f64>::zeros(hidden);
            let mut dc_rec = Array1::<f64>::zeros(hidden);

            for t in (0..seq_len).rev() {
                let s = &cache.steps[k][t];
                let dh = &d_out.row(t) + &dh_rec;
                let d_o = &dh * &s.tanh_c;
                let dc = &dc_rec + &(&dh * &s.o * &s.tanh_c.mapv(|v| 1.0 - v * v));
                let d_i = &dc * &s.g;
                let d_g = &dc * &s.i;
                let d_f = &dc * &s.c_prev;
                dc_rec = &dc * &s.f;

                let da_i = &d_i * &s.i.mapv(|v| v * (1.0 - v));
                let da_f = &d_f * &s.f.mapv(|v| v * (1.0 - v));
                let da_g = &d_g * &s.g.mapv(|v| 1.0 - v * v);
                let da_o = &d_o * &s.o.mapv(|v| v * (1.0 - v));

                let mut dx = Array1::<f64>::zeros(in_width);
                dh_rec = Array1::zeros(hidden);
                for ((gate, gate_grad), da) in layer
                    .gates()
                    .iter()
                    .zip(grad.gates_mut())
                    .zip([&da_i, &da_f, &da_g, &da_o])
                {
                    gate_grad.1.accumulate(da, s.x.view(), s.h_prev.view());
                    dx += &gate.1.w.t().dot(da);
                    dh_rec += &gate.1.u.t().dot(da);
                }
                d_in.row_mut(t).assign(&dx);
            }

            if k > 0 {
                if let Some(masks) = &cache.masks {
                    d_in *= &masks[k - 1];
                }
            }
            d_out = d_in;
        }
        Ok((grads, d_out))
    }
}

impl Parameters for LstmWeights {
    fn for_each_tensor(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        for (k, layer) in self.layers.iter().enumerate() {
            for (name, g) in layer.gates() {
                let base = join(prefix, &format!("{k}.{name}"));
                f(&join(&base, "w"), g.w.shape(), g.w.as_slice().unwrap());
                f(&join(&base, "u"), g.u.shape(), g.u.as_slice().unwrap());
                f(&join(&base, "b"), g.b.shape(), g.b.as_slice().unwrap());
            }
        }
    }

    fn for_each_tensor_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        for (k, layer) in self.layers.iter_mut().enumerate() {
            for (name, g) in layer.gates_mut() {
                let base = join(prefix, &format!("{k}.{name}"));
                f(&join(&base, "w"), g.w.as_slice_mut().unwrap());
                f(&join(&base, "u"), g.u.as_slice_mut().unwrap());
                f(&join(&base, "b"), g.b.as_slice_mut().unwrap());
            }
        }
    }
}

/// Stacks a single feature vector as a length-1 sequence.
pub fn as_sequence(x: ArrayView1<f64>) -> ArrayView2<f64> {
    x.insert_axis(Axis(0))
}
