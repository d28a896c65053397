use std::fmt;

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::batch::{assemble, length_batches, Encoded};
use super::{LinkerModel, ModelError};
use crate::corpus::Corpus;
use crate::eval::{token_prf, TokenCounts};
use crate::nn::{adam_step, bce_with_logits, AdamConfig, AdamState, Matrix, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMetric {
    #[default]
    TokenF1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    pub metric: ValidationMetric,
    /// Batch size for validation passes.
    pub eval_batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            epochs: 30,
            batch_size: 32,
            lr: adam.lr,
            beta1: adam.beta1,
            beta2: adam.beta2,
            adam_eps: adam.eps,
            patience: 5,
            seed: 0,
            metric: ValidationMetric::TokenF1,
            eval_batch_size: 64,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 || self.eval_batch_size == 0 {
            return bad("batch size must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be positive");
        }
        if self.patience >= self.epochs {
            return bad("patience must be smaller than epochs");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam betas must be in [0, 1)");
        }
        if self.adam_eps.is_nan() || self.adam_eps <= 0.0 {
            return bad("Adam epsilon must be positive");
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_f1: f64,
}

impl fmt::Display for EpochRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "epoch={} loss={:.6} val_f1={:.6}", self.epoch, self.train_loss, self.val_f1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val_f1: f64,
    pub stopped_early: bool,
}

fn encode_all<T: Real>(model: &LinkerModel<T>, corpus: &Corpus) -> Result<Vec<Encoded<T>>, ModelError> {
    corpus
        .instances()
        .map(|inst| model.encode(inst.sentence, inst.event.verb_index, Some(&inst.gold())))
        .collect()
}

/// Token F1 of `model` on pre-encoded labeled instances.
fn token_f1<T: Real>(model: &LinkerModel<T>, items: &[Encoded<T>], batch_size: usize) -> Result<f64, ModelError> {
    let probs = model.batch_probabilities(items, batch_size)?;
    let mut counts = TokenCounts::default();
    for (e, p) in items.iter().zip(&probs) {
        let pred = model.threshold_labels(p);
        let gold = crate::corpus::LabelVector::from_bools(e.y.iter().map(|&v| v > T::zero()));
        counts += token_prf(&pred, &gold).expect("lengths agree by construction");
    }
    Ok(counts.metrics().f1)
}

/// Minibatch Adam on per-token cross-entropy with early stopping on
/// validation token F1. On return `model` holds the best parameters seen.
///
/// `on_epoch` is called after every epoch; the same record is also logged.
pub fn train<T: Real>(
    model: &mut LinkerModel<T>,
    train: &Corpus,
    val: &Corpus,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainHistory, ModelError> {
    cfg.validate()?;
    let train_items = encode_all(model, train)?;
    let val_items = encode_all(model, val)?;
    if train_items.is_empty() {
        return Err(ModelError::EmptyCorpus("training"));
    }
    if val_items.is_empty() {
        return Err(ModelError::EmptyCorpus("validation"));
    }
    let lengths: Vec<usize> = train_items.iter().map(|e| e.len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut adam = AdamState::new(&model.params, cfg.adam());
    let net = model.net().clone();
    let width = model.input_width();
    model.params.zero_grads();

    let mut history = TrainHistory {
        epochs: Vec::new(),
        best_epoch: 0,
        best_val_f1: f64::NEG_INFINITY,
        stopped_early: false,
    };
    let mut best = model.params.clone();
    let mut since_best = 0;
    for epoch in 1..=cfg.epochs {
        let mut loss_sum = 0.0;
        let mut tokens = 0usize;
        for (bi, members) in length_batches(&lengths, cfg.batch_size, &mut rng).into_iter().enumerate() {
            let refs: Vec<&Encoded<T>> = members.iter().map(|&i| &train_items[i]).collect();
            let (x, y, shape) = assemble(&refs, width);
            let (z, cache) = net.forward_train(&model.params, x, shape, Some(&mut rng))?;
            let (loss, dz) = bce_with_logits(z.as_slice(), &y)?;
            let loss = loss.as_f64();
            if !loss.is_finite() {
                return Err(ModelError::Diverged { epoch, batch: bi + 1 });
            }
            let dz = Matrix::from_vec(z.rows(), 1, dz)?;
            net.backward(&mut model.params, &cache, &dz);
            adam_step(&mut model.params, &mut adam);
            model.params.zero_grads();
            loss_sum += loss * shape.rows() as f64;
            tokens += shape.rows();
        }
        if !model.params.all_finite() {
            return Err(ModelError::Diverged { epoch, batch: 0 });
        }
        let val_f1 = token_f1(model, &val_items, cfg.eval_batch_size)?;
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / tokens as f64,
            val_f1,
        };
        info!("{record}");
        on_epoch(&record);
        history.epochs.push(record);
        if val_f1 > history.best_val_f1 {
            history.best_val_f1 = val_f1;
            history.best_epoch = epoch;
            best.copy_values_from(&model.params);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                history.stopped_early = epoch < cfg.epochs;
                break;
            }
        }
    }
    model.params.copy_values_from(&best);
    Ok(history)
}
