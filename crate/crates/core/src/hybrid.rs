//! Hybrid LSTM → dense → VQC → dense classifier, and the classical LSTM baseline.
//!
//! Both models see one feature vector per sample, fed to the LSTM as a
//! length-1 sequence. Forward passes return raw logits; the sigmoid is applied
//! inside the loss and inside [`predict`].
//!
//! Batches fan out across samples with rayon. Dropout masks are drawn from the
//! caller's generator before the fan-out and per-sample gradients are summed
//! in sample order, so results do not depend on the thread count.

use ndarray::{arr1, Array1, Array2, ArrayView1, ArrayView2};
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::neural::lstm::as_sequence;
use crate::neural::{dropout_mask, DenseLayer, LstmCache, LstmState, LstmWeights};
use crate::params::{join, Parameters};
use crate::vqc::{self, VqcConfig, VqcParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Hybrid,
    Baseline,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Hybrid => f.write_str("hybrid"),
            ModelKind::Baseline => f.write_str("baseline"),
        }
    }
}

/// Architecture of either model. `n_qubits`/`vqc_layers` are ignored by the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub input_size: usize,
    pub hidden_size: usize,
    pub lstm_layers: usize,
    pub n_qubits: usize,
    pub vqc_layers: usize,
    pub dropout: f64,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.input_size == 0 || self.hidden_size == 0 || self.lstm_layers == 0 {
            return Err(Error::InvalidArgument(format!(
                "input_size, hidden_size and lstm_layers must be positive: {self:?}"
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument(format!("dropout must be in [0, 1), got {}", self.dropout)));
        }
        if self.kind == ModelKind::Hybrid {
            VqcConfig::new(self.n_qubits, self.vqc_layers)?;
        }
        Ok(())
    }
}

/// Selects training (dropout active, masks drawn from the generator) or evaluation.
pub enum Mode<'a> {
    Train(&'a mut dyn RngCore),
    Eval,
}

/// Per-sample forward/backward contract shared by both models.
pub trait Classifier: Parameters + Clone + Send + Sync + Sized {
    type Masks: Send + Sync;
    type SampleCache: Send;

    fn input_size(&self) -> usize;

    fn draw_masks(&self, rng: &mut dyn RngCore) -> Result<Self::Masks>;

    fn forward_sample(&self, x: ArrayView1<f64>, masks: Option<&Self::Masks>) -> Result<(f64, Self::SampleCache)>;

    /// Gradient of `dlogit · logit` for one sample, shaped like `self`.
    fn backward_sample(&self, cache: Self::SampleCache, dlogit: f64) -> Result<Self>;
}

/// Caches from one batched forward call, consumed by [`backward`].
pub struct ForwardCache<C> {
    samples: Vec<C>,
    n_params: usize,
}

impl<C> ForwardCache<C> {
    pub fn batch_size(&self) -> usize {
        self.samples.len()
    }
}

/// Logits for every row of `batch`.
pub fn forward<M: Classifier>(
    model: &M,
    batch: ArrayView2<f64>,
    mode: Mode<'_>,
) -> Result<(Vec<f64>, ForwardCache<M::SampleCache>)> {
    ensure_len("model input width", model.input_size(), batch.ncols())?;
    let masks = match mode {
        Mode::Train(rng) => Some(
            (0..batch.nrows())
                .map(|_| model.draw_masks(rng))
                .collect::<Result<Vec<_>>>()?,
        ),
        Mode::Eval => None,
    };
    let results = (0..batch.nrows())
        .into_par_iter()
        .map(|b| model.forward_sample(batch.row(b), masks.as_ref().map(|m| &m[b])))
        .collect::<Result<Vec<_>>>()?;
    let (logits, samples) = results.into_iter().unzip();
    Ok((
        logits,
        ForwardCache {
            samples,
            n_params: model.n_params(),
        },
    ))
}

/// Eval-mode logits without keeping caches.
pub fn logits<M: Classifier>(model: &M, batch: ArrayView2<f64>) -> Result<Vec<f64>> {
    ensure_len("model input width", model.input_size(), batch.ncols())?;
    (0..batch.nrows())
        .into_par_iter()
        .map(|b| model.forward_sample(batch.row(b), None).map(|(z, _)| z))
        .collect()
}

/// Sums per-sample gradients (in sample order) into one gradient shaped like `model`.
pub fn backward<M: Classifier>(model: &M, cache: ForwardCache<M::SampleCache>, dlogits: &[f64]) -> Result<M> {
    if cache.n_params != model.n_params() {
        return Err(Error::InvalidState(format!(
            "forward cache belongs to a model with {} parameters, got {}",
            cache.n_params,
            model.n_params()
        )));
    }
    if cache.samples.len() != dlogits.len() {
        return Err(Error::InvalidState(format!(
            "forward cache holds {} samples but {} logit gradients were given",
            cache.samples.len(),
            dlogits.len()
        )));
    }
    let per_sample = cache
        .samples
        .into_par_iter()
        .zip(dlogits.par_iter())
        .map(|(c, &d)| model.backward_sample(c, d).map(|g| g.flatten()))
        .collect::<Result<Vec<_>>>()?;
    let mut total = vec![0.0; model.n_params()];
    for g in &per_sample {
        for (t, v) in total.iter_mut().zip(g) {
            *t += v;
        }
    }
    let mut grad = model.clone();
    grad.assign_flat(&total)?;
    Ok(grad)
}

/// Hard labels: 1 iff `σ(logit) ≥ threshold` (so logit 0 maps to 1 at 0.5).
pub fn predict(logits: &[f64], threshold: f64) -> Result<Vec<u8>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must be in (0, 1), got {threshold}")));
    }
    let cut = (threshold / (1.0 - threshold)).ln();
    Ok(logits.iter().map(|&z| u8::from(z >= cut)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    pub lstm: LstmWeights,
    pub reducer: DenseLayer,
    pub vqc: VqcParams,
    pub head: DenseLayer,
    pub dropout_rate: f64,
}

pub struct HybridCache {
    lstm: LstmCache,
    mask: Option<Array1<f64>>,
    reduced_in: Array1<f64>,
    angles: Array1<f64>,
    measured: Array1<f64>,
}

impl HybridModel {
    pub fn new(spec: &ModelSpec, rng: &mut impl Rng) -> Result<Self> {
        spec.validate()?;
        let cfg = VqcConfig::new(spec.n_qubits, spec.vqc_layers)?;
        Ok(Self {
            lstm: LstmWeights::glorot(spec.input_size, spec.hidden_size, spec.lstm_layers, rng),
            reducer: DenseLayer::glorot(spec.hidden_size, spec.n_qubits, rng),
            vqc: VqcParams::random(cfg, rng),
            head: DenseLayer::glorot(spec.n_qubits, 1, rng),
            dropout_rate: spec.dropout,
        })
    }

    pub fn zeros(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        let cfg = VqcConfig::new(spec.n_qubits, spec.vqc_layers)?;
        Ok(Self {
            lstm: LstmWeights::zeros(spec.input_size, spec.hidden_size, spec.lstm_layers),
            reducer: DenseLayer::zeros(spec.hidden_size, spec.n_qubits),
            vqc: VqcParams::zeros(cfg),
            head: DenseLayer::zeros(spec.n_qubits, 1),
            dropout_rate: spec.dropout,
        })
    }

    /// Trainable circuit angles, `3 · vqc_layers · n_qubits`.
    pub fn n_quantum_params(&self) -> usize {
        self.vqc.config().n_params()
    }
}

impl Parameters for HybridModel {
    fn for_each_tensor(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        self.lstm.for_each_tensor(&join(prefix, "lstm"), f);
        self.reducer.for_each_tensor(&join(prefix, "reducer"), f);
        self.vqc.for_each_tensor(&join(prefix, "vqc"), f);
        self.head.for_each_tensor(&join(prefix, "head"), f);
    }

    fn for_each_tensor_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        self.lstm.for_each_tensor_mut(&join(prefix, "lstm"), f);
        self.reducer.for_each_tensor_mut(&join(prefix, "reducer"), f);
        self.vqc.for_each_tensor_mut(&join(prefix, "vqc"), f);
        self.head.for_each_tensor_mut(&join(prefix, "head"), f);
    }
}

impl Parameters for VqcParams {
    fn for_each_tensor(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        let cfg = self.config();
        f(&join(prefix, "angles"), &[cfg.n_layers, cfg.n_qubits, 3], self.as_flat());
    }

    fn for_each_tensor_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        f(&join(prefix, "angles"), self.as_flat_mut());
    }
}

impl Classifier for HybridModel {
    type Masks = Array1<f64>;
    type SampleCache = HybridCache;

    fn input_size(&self) -> usize {
        self.lstm.input_size()
    }

    fn draw_masks(&self, rng: &mut dyn RngCore) -> Result<Self::Masks> {
        dropout_mask(self.lstm.hidden_size(), self.dropout_rate, rng)
    }

    fn forward_sample(&self, x: ArrayView1<f64>, masks: Option<&Self::Masks>) -> Result<(f64, HybridCache)> {
        let (h, lstm) = self.lstm.forward(as_sequence(x))?;
        let reduced_in = match masks {
            Some(m) => &h * m,
            None => h,
        };
        let angles = self.reducer.forward(reduced_in.view())?;
        let measured = Array1::from(vqc::forward(angles.as_slice().unwrap(), &self.vqc)?);
        let logit = self.head.forward(measured.view())?[0];
        Ok((
            logit,
            HybridCache {
                lstm,
                mask: masks.cloned(),
                reduced_in,
                angles,
                measured,
            },
        ))
    }

    fn backward_sample(&self, cache: HybridCache, dlogit: f64) -> Result<Self> {
        let (head, dq) = self.head.backward(cache.measured.view(), arr1(&[dlogit]).view())?;
        let shift = vqc::backward(cache.angles.as_slice().unwrap(), &self.vqc, dq.as_slice().unwrap())?;
        let (reducer, dh) = self.reducer.backward(cache.reduced_in.view(), ArrayView1::from(&shift.inputs))?;
        let dh = match &cache.mask {
            Some(m) => dh * m,
            None => dh,
        };
        let (lstm, _) = self.lstm.backward(&cache.lstm, dh.view())?;
        Ok(Self {
            lstm,
            reducer,
            vqc: shift.params,
            head,
            dropout_rate: self.dropout_rate,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub lstm: LstmWeights,
    pub head: DenseLayer,
    pub dropout_rate: f64,
}

pub struct BaselineCache {
    lstm: LstmCache,
    h: Array1<f64>,
}

impl BaselineModel {
    pub fn new(spec: &ModelSpec, rng: &mut impl Rng) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            lstm: LstmWeights::glorot(spec.input_size, spec.hidden_size, spec.lstm_layers, rng),
            head: DenseLayer::glorot(spec.hidden_size, 1, rng),
            dropout_rate: spec.dropout,
        })
    }

    pub fn zeros(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            lstm: LstmWeights::zeros(spec.input_size, spec.hidden_size, spec.lstm_layers),
            head: DenseLayer::zeros(spec.hidden_size, 1),
            dropout_rate: spec.dropout,
        })
    }
}

impl Parameters for BaselineModel {
    fn for_each_tensor(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        self.lstm.for_each_tensor(&join(prefix, "lstm"), f);
        self.head.for_each_tensor(&join(prefix, "head"), f);
    }

    fn for_each_tensor_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        self.lstm.for_each_tensor_mut(&join(prefix, "lstm"), f);
        self.head.for_each_tensor_mut(&join(prefix, "head"), f);
    }
}

impl Classifier for BaselineModel {
    /// One `1 × hidden` mask per gap between stacked LSTM layers.
    type Masks = Vec<Array2<f64>>;
    type SampleCache = BaselineCache;

    fn input_size(&self) -> usize {
        self.lstm.input_size()
    }

    fn draw_masks(&self, rng: &mut dyn RngCore) -> Result<Self::Masks> {
        let hidden = self.lstm.hidden_size();
        (1..self.lstm.n_layers())
            .map(|_| {
                dropout_mask(hidden, self.dropout_rate, rng)
                    .map(|m| m.into_shape_with_order((1, hidden)).expect("mask is contiguous"))
            })
            .collect()
    }

    fn forward_sample(&self, x: ArrayView1<f64>, masks: Option<&Self::Masks>) -> Result<(f64, BaselineCache)> {
        let init = vec![LstmState::zeros(self.lstm.hidden_size()); self.lstm.n_layers()];
        let (h, lstm) = self.lstm.forward_from(as_sequence(x), &init, masks.map(Vec::as_slice))?;
        let logit = self.head.forward(h.view())?[0];
        Ok((logit, BaselineCache { lstm, h }))
    }

    fn backward_sample(&self, cache: BaselineCache, dlogit: f64) -> Result<Self> {
        let (head, dh) = self.head.backward(cache.h.view(), arr1(&[dlogit]).view())?;
        let (lstm, _) = self.lstm.backward(&cache.lstm, dh.view())?;
        Ok(Self {
            lstm,
            head,
            dropout_rate: self.dropout_rate,
        })
    }
}

/// Either trained model, as stored in checkpoints and driven by the CLI.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Hybrid(HybridModel),
    Baseline(BaselineModel),
}

impl Model {
    pub fn new(spec: &ModelSpec, rng: &mut impl Rng) -> Result<Self> {
        Ok(match spec.kind {
            ModelKind::Hybrid => Model::Hybrid(HybridModel::new(spec, rng)?),
            ModelKind::Baseline => Model::Baseline(BaselineModel::new(spec, rng)?),
        })
    }

    pub fn zeros(spec: &ModelSpec) -> Result<Self> {
        Ok(match spec.kind {
            ModelKind::Hybrid => Model::Hybrid(HybridModel::zeros(spec)?),
            ModelKind::Baseline => Model::Baseline(BaselineModel::zeros(spec)?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Hybrid(_) => ModelKind::Hybrid,
            Model::Baseline(_) => ModelKind::Baseline,
        }
    }

    pub fn logits(&self, batch: ArrayView2<f64>) -> Result<Vec<f64>> {
        match self {
            Model::Hybrid(m) => logits(m, batch),
            Model::Baseline(m) => logits(m, batch),
        }
    }
}

impl Parameters for Model {
    fn for_each_tensor(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        match self {
            Model::Hybrid(m) => m.for_each_tensor(prefix, f),
            Model::Baseline(m) => m.for_each_tensor(prefix, f),
        }
    }

    fn for_each_tensor_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        match self {
            Model::Hybrid(m) => m.for_each_tensor_mut(prefix, f),
            Model::Baseline(m) => m.for_each_tensor_mut(prefix, f),
        }
    }
}

#[cfg(test)]
mod tests {
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::neural::bce_with_logits;

    fn spec(kind: ModelKind) -> ModelSpec {
        ModelSpec {
            kind,
            input_size: 3,
            hidden_size: 4,
            lstm_layers: if kind == ModelKind::Hybrid { 1 } else { 2 },
            n_qubits: 2,
            vqc_layers: 1,
            dropout: 0.0,
        }
    }

    fn batch(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.5..1.5))
    }

    #[test]
    fn logits_have_one_entry_per_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = HybridModel::new(&spec(ModelKind::Hybrid), &mut rng).unwrap();
        let (z, cache) = forward(&m, batch(5, 3, 1).view(), Mode::Eval).unwrap();
        assert_eq!(z.len(), 5);
        assert_eq!(cache.batch_size(), 5);
        let b = BaselineModel::new(&spec(ModelKind::Baseline), &mut rng).unwrap();
        assert_eq!(logits(&b, batch(7, 3, 2).view()).unwrap().len(), 7);
    }

    #[test]
    fn zero_models_emit_zero_logits() {
        let h = HybridModel::zeros(&spec(ModelKind::Hybrid)).unwrap();
        assert_eq!(logits(&h, batch(3, 3, 4).view()).unwrap(), vec![0.0; 3]);
        let b = BaselineModel::zeros(&spec(ModelKind::Baseline)).unwrap();
        assert_eq!(logits(&b, batch(3, 3, 4).view()).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn zero_hybrid_head_gradient_is_dlogit_times_ones() {
        let h = HybridModel::zeros(&spec(ModelKind::Hybrid)).unwrap();
        let x = batch(1, 3, 5);
        let (_, cache) = forward(&h, x.view(), Mode::Eval).unwrap();
        let g = backward(&h, cache, &[0.7]).unwrap();
        assert_eq!(g.head.weight.as_slice().unwrap(), &[0.7, 0.7]);
        assert_eq!(g.head.bias[0], 0.7);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = HybridModel::new(&spec(ModelKind::Hybrid), &mut rng).unwrap();
        let (_, cache) = forward(&h, batch(3, 3, 7).view(), Mode::Eval).unwrap();
        let g = backward(&h, cache, &[0.0; 3]).unwrap();
        assert!(g.flatten().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_and_cache_mismatches() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = HybridModel::new(&spec(ModelKind::Hybrid), &mut rng).unwrap();
        assert!(matches!(logits(&h, batch(2, 4, 0).view()), Err(Error::Shape { .. })));
        let (_, cache) = forward(&h, batch(2, 3, 0).view(), Mode::Eval).unwrap();
        assert!(matches!(backward(&h, cache, &[1.0]), Err(Error::InvalidState(_))));

        let mut bigger = spec(ModelKind::Hybrid);
        bigger.hidden_size = 5;
        let other = HybridModel::new(&bigger, &mut rng).unwrap();
        let (_, cache) = forward(&h, batch(2, 3, 0).view(), Mode::Eval).unwrap();
        assert!(matches!(backward(&other, cache, &[1.0, 1.0]), Err(Error::InvalidState(_))));
    }

    #[test]
    fn quantum_parameter_count() {
        let mut s = spec(ModelKind::Hybrid);
        s.n_qubits = 10;
        s.vqc_layers = 2;
        let h = HybridModel::zeros(&s).unwrap();
        assert_eq!(h.n_quantum_params(), 60);
        let mut names = Vec::new();
        h.for_each_tensor("", &mut |n, shape, _| names.push((n.to_string(), shape.to_vec())));
        assert!(names.contains(&("vqc.angles".to_string(), vec![2, 10, 3])));
    }

    #[test]
    fn predict_boundary_and_monotonicity() {
        assert_eq!(predict(&[0.0, -3.0, 3.0], 0.5).unwrap(), vec![1, 0, 1]);
        assert!(predict(&[0.0], 0.0).is_err());
        assert!(predict(&[0.0], 1.0).is_err());
        assert_eq!(predict(&[0.5], 0.7).unwrap(), vec![0]);
        assert_eq!(predict(&[1.0], 0.7).unwrap(), vec![1]);
        let z = [-2.0, -0.1, 0.0, 0.4, 5.0];
        let labels = predict(&z, 0.5).unwrap();
        for (i, &zi) in z.iter().enumerate() {
            let raised = predict(&[zi + 0.3], 0.5).unwrap()[0];
            assert!(raised >= labels[i]);
        }
    }

    #[test]
    fn eval_mode_is_deterministic_and_ignores_dropout() {
        let mut s = spec(ModelKind::Hybrid);
        s.dropout = 0.3;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = HybridModel::new(&s, &mut rng).unwrap();
        let x = batch(6, 3, 13);
        assert_eq!(logits(&h, x.view()).unwrap(), logits(&h, x.view()).unwrap());
    }

    #[test]
    fn train_mode_masks_follow_the_generator() {
        let mut s = spec(ModelKind::Baseline);
        s.dropout = 0.3;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = BaselineModel::new(&s, &mut rng).unwrap();
        let x = batch(8, 3, 2);
        let run = |seed| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            forward(&b, x.view(), Mode::Train(&mut r)).unwrap().0
        };
        assert_eq!(run(5), run(5));
    }

    fn fd_check<M: Classifier>(model: &M, x: &Array2<f64>, y: &[u8], h: f64, tol: f64) {
        let (z, cache) = forward(model, x.view(), Mode::Eval).unwrap();
        let (_, dz) = bce_with_logits(&z, y).unwrap();
        let analytic = backward(model, cache, &dz).unwrap().flatten();
        let base = model.flatten();
        let loss = |p: &[f64]| {
            let mut m = model.clone();
            m.assign_flat(p).unwrap();
            bce_with_logits(&logits(&m, x.view()).unwrap(), y).unwrap().0
        };
        for i in 0..base.len() {
            let mut v = base.clone();
            v[i] += h;
            let up = loss(&v);
            v[i] -= 2.0 * h;
            let down = loss(&v);
            let fd = (up - down) / (2.0 * h);
            let err = (fd - analytic[i]).abs();
            assert!(err <= tol * fd.abs().max(1e-3), "param {i}: fd {fd} analytic {}", analytic[i]);
        }
    }

    #[test]
    fn hybrid_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let m = HybridModel::new(&spec(ModelKind::Hybrid), &mut rng).unwrap();
        fd_check(&m, &batch(4, 3, 32), &[1, 0, 0, 1], 1e-4, 1e-4);
    }

    #[test]
    fn baseline_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let m = BaselineModel::new(&spec(ModelKind::Baseline), &mut rng).unwrap();
        fd_check(&m, &batch(4, 3, 42), &[0, 1, 1, 0], 1e-6, 1e-5);
    }

    #[test]
    fn masked_hybrid_gradient_matches_finite_differences() {
        let mut s = spec(ModelKind::Hybrid);
        s.dropout = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let m = HybridModel::new(&s, &mut rng).unwrap();
        let x = batch(1, 3, 52);
        let mask = arr1(&[2.0, 0.0, 2.0, 2.0]);
        let (z, cache) = m.forward_sample(x.row(0), Some(&mask)).unwrap();
        let analytic = m.backward_sample(cache, 1.0).unwrap().flatten();
        let base = m.flatten();
        let h = 1e-5;
        for i in 0..base.len() {
            let mut v = base.clone();
            v[i] += h;
            let mut p = m.clone();
            p.assign_flat(&v).unwrap();
            let up = p.forward_sample(x.row(0), Some(&mask)).unwrap().0;
            v[i] -= 2.0 * h;
            p.assign_flat(&v).unwrap();
            let down = p.forward_sample(x.row(0), Some(&mask)).unwrap().0;
            let fd = (up - down) / (2.0 * h);
            assert!((fd - analytic[i]).abs() <= 1e-5 * fd.abs().max(1e-3));
        }
        assert!(z.is_finite());
    }
}
