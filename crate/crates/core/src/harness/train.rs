use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{save_checkpoint, Checkpoint, EpochRecord, TrainConfig};
use crate::dataprep::{DatasetSplit, LabeledSet};
use crate::error::{Error, Result};
use crate::hybrid::{self, BaselineModel, Classifier, HybridModel, Mode, Model, ModelKind, ModelSpec};
use crate::neural::{bce_with_logits, clip_grad_norm, Adam};

pub struct TrainOutcome {
    /// Parameters after the last epoch.
    pub model: Model,
    pub records: Vec<EpochRecord>,
    /// Snapshot with the lowest validation loss; `None` when no epoch ran.
    pub best: Option<Checkpoint>,
    pub optimizer_steps: u64,
}

/// Optional side effects of [`train_with`].
#[derive(Default)]
pub struct TrainHooks<'a> {
    /// Where to write the best checkpoint each time validation loss improves.
    pub checkpoint_path: Option<&'a Path>,
    pub on_epoch: Option<&'a mut dyn FnMut(&EpochRecord)>,
}

pub fn train(cfg: &TrainConfig, split: &DatasetSplit) -> Result<TrainOutcome> {
    train_with(cfg, split, TrainHooks::default())
}

/// Mini-batch Adam training with per-epoch validation.
///
/// One generator seeded from `cfg.seed` drives, in order, weight
/// initialization, then each epoch's shuffle and dropout masks.
pub fn train_with(cfg: &TrainConfig, split: &DatasetSplit, hooks: TrainHooks<'_>) -> Result<TrainOutcome> {
    cfg.validate()?;
    if split.train.is_empty() || split.val.is_empty() {
        return Err(Error::InvalidArgument("training and validation splits must be non-empty".into()));
    }
    let spec = cfg.model_spec(split.train.n_features());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.model_kind {
        ModelKind::Hybrid => {
            let model = HybridModel::new(&spec, &mut rng)?;
            run(model, spec, cfg, split, rng, hooks, Model::Hybrid)
        }
        ModelKind::Baseline => {
            let model = BaselineModel::new(&spec, &mut rng)?;
            run(model, spec, cfg, split, rng, hooks, Model::Baseline)
        }
    }
}

fn accuracy(logits: &[f64], labels: &[u8]) -> f64 {
    let correct = logits
        .iter()
        .zip(labels)
        .filter(|(&z, &y)| u8::from(z >= 0.0) == y)
        .count();
    correct as f64 / labels.len() as f64
}

fn run<M: Classifier>(
    mut model: M,
    spec: ModelSpec,
    cfg: &TrainConfig,
    split: &DatasetSplit,
    mut rng: ChaCha8Rng,
    mut hooks: TrainHooks<'_>,
    wrap: fn(M) -> Model,
) -> Result<TrainOutcome> {
    let train: &LabeledSet = &split.train;
    let mut adam = Adam::new(model.n_params(), cfg.lr, cfg.weight_decay);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut params = model.flatten();
    let mut records = Vec::with_capacity(cfg.epochs);
    let mut best: Option<Checkpoint> = None;

    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let batch = train.select(chunk);
            let (logits, cache) = hybrid::forward(&model, batch.features.view(), Mode::Train(&mut rng))?;
            let (loss, dlogits) = bce_with_logits(&logits, &batch.labels)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b + 1 });
            }
            let mut grads = hybrid::backward(&model, cache, &dlogits)?.flatten();
            if !clip_grad_norm(&mut grads, cfg.clip_norm)?.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch: b + 1 });
            }
            adam.step(&mut params, &grads)?;
            model.assign_flat(&params)?;
            loss_sum += loss * chunk.len() as f64;
        }
        let val_logits = hybrid::logits(&model, split.val.features.view())?;
        let (val_loss, _) = bce_with_logits(&val_logits, &split.val.labels)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, batch: 0 });
        }
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            val_loss,
            val_accuracy: accuracy(&val_logits, &split.val.labels),
            epoch_seconds: start.elapsed().as_secs_f64(),
        };

        if best.as_ref().is_none_or(|b| val_loss < b.val_loss) {
            let ck = Checkpoint {
                model: wrap(model.clone()),
                spec,
                config: cfg.clone(),
                epoch,
                val_loss,
            };
            if let Some(path) = hooks.checkpoint_path {
                save_checkpoint(&ck, path)?;
            }
            best = Some(ck);
        }
        if let Some(f) = hooks.on_epoch.as_mut() {
            f(&record);
        }
        records.push(record);
    }

    Ok(TrainOutcome {
        model: wrap(model),
        records,
        best,
        optimizer_steps: adam.steps(),
    })
}
