//! The two token labelers, their training loop and checkpoint files.

mod batch;
mod checkpoint;
mod net;
mod train;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use checkpoint::{checkpoint_features, load_checkpoint, save_checkpoint, AnyLinker, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use train::{train, EpochRecord, TrainConfig, TrainHistory};

pub(crate) use batch::Encoded;
use net::Net;

use crate::corpus::{AnnotatedSentence, LabelVector};
use crate::features::{featurize, EmbeddingTable, FeatureConfig, FeatureError, TagInventory};
use crate::nn::{sigmoid, Matrix, NnError, ParamStore, Real, SeqShape};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Shape(#[from] NnError),
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("{0} corpus has no event instances")]
    EmptyCorpus(&'static str),
    #[error("training diverged: non-finite loss in epoch {epoch}, batch {batch}")]
    Diverged { epoch: usize, batch: usize },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint holds {found} parameters, expected {expected}")]
    DType { found: String, expected: String },
    #[error("feature width mismatch: model expects {expected} columns, features have {found}")]
    Width { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Bilstm,
    ResidualCnn,
}

impl Architecture {
    pub fn name(&self) -> &'static str {
        match self {
            Architecture::Bilstm => "bilstm",
            Architecture::ResidualCnn => "cnn",
        }
    }

    pub fn default_config(&self) -> ArchConfig {
        match self {
            Architecture::Bilstm => ArchConfig::Bilstm(BiLstmConfig::default()),
            Architecture::ResidualCnn => ArchConfig::ResidualCnn(CnnConfig::default()),
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bilstm" | "lstm" => Ok(Architecture::Bilstm),
            "cnn" | "residual_cnn" | "residual-cnn" => Ok(Architecture::ResidualCnn),
            other => Err(format!("unknown architecture {other:?} (expected bilstm or cnn)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiLstmConfig {
    pub hidden: usize,
    pub recurrent_dropout: f64,
    pub dense: usize,
    pub dropout: f64,
}

impl Default for BiLstmConfig {
    fn default() -> Self {
        BiLstmConfig {
            hidden: 128,
            recurrent_dropout: 0.2,
            dense: 128,
            dropout: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnnConfig {
    pub channels: usize,
    pub blocks: usize,
    pub dense: usize,
    pub dropout: f64,
}

impl Default for CnnConfig {
    fn default() -> Self {
        CnnConfig {
            channels: 64,
            blocks: 7,
            dense: 512,
            dropout: 0.4,
        }
    }
}

/// Architecture plus its layer sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "snake_case")]
pub enum ArchConfig {
    Bilstm(BiLstmConfig),
    ResidualCnn(CnnConfig),
}

impl ArchConfig {
    pub fn architecture(&self) -> Architecture {
        match self {
            ArchConfig::Bilstm(_) => Architecture::Bilstm,
            ArchConfig::ResidualCnn(_) => Architecture::ResidualCnn,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let (sizes, rates) = match *self {
            ArchConfig::Bilstm(c) => (vec![c.hidden, c.dense], vec![c.recurrent_dropout, c.dropout]),
            ArchConfig::ResidualCnn(c) => (vec![c.channels, c.dense], vec![c.dropout]),
        };
        if sizes.contains(&0) {
            return Err(ModelError::Config("layer sizes must be positive".into()));
        }
        if rates.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(ModelError::Config("dropout rates must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Probabilities and thresholded labels for one (sentence, verb) instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: LabelVector,
    pub probabilities: Vec<f64>,
}

/// A trained or freshly initialized event location labeler.
#[derive(Debug, Clone)]
pub struct LinkerModel<T> {
    pub arch: ArchConfig,
    pub features: FeatureConfig,
    pub inventory: TagInventory,
    pub embeddings: Arc<EmbeddingTable>,
    /// Tokens with probability at or above this are labeled locations.
    pub threshold: f64,
    pub params: ParamStore<T>,
    net: Net,
    width: usize,
}

impl<T: Real> LinkerModel<T> {
    /// Initializes a model whose parameters are drawn from `seed`.
    pub fn new(
        arch: ArchConfig,
        features: FeatureConfig,
        inventory: TagInventory,
        embeddings: Arc<EmbeddingTable>,
        seed: u64,
    ) -> Result<Self, ModelError> {
        features.validate()?;
        arch.validate()?;
        if features.embedding && embeddings.dim() != features.embedding_dim {
            return Err(FeatureError::EmbeddingWidth {
                expected: features.embedding_dim,
                found: embeddings.dim(),
            }
            .into());
        }
        let width = features.layout(&inventory).width;
        let mut params = ParamStore::new();
        params.rng_seed = seed;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = Net::build(&arch, width, &mut params, &mut rng);
        Ok(LinkerModel {
            arch,
            features,
            inventory,
            embeddings,
            threshold: 0.5,
            params,
            net,
            width,
        })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch.architecture()
    }

    /// Feature columns per token.
    pub fn input_width(&self) -> usize {
        self.width
    }

    pub fn num_parameters(&self) -> usize {
        self.params.num_scalars()
    }

    pub(crate) fn encode(
        &self,
        s: &AnnotatedSentence,
        verb_index: usize,
        gold: Option<&LabelVector>,
    ) -> Result<Encoded<T>, ModelError> {
        let fm = featurize(s, verb_index, &self.features, &self.embeddings, &self.inventory)?;
        if fm.width != self.width {
            return Err(ModelError::Width {
                expected: self.width,
                found: fm.width,
            });
        }
        let y = gold
            .map(|g| g.as_slice().iter().map(|&v| T::of(f64::from(v))).collect())
            .unwrap_or_default();
        Ok(Encoded {
            x: fm.values.iter().map(|&v| T::of(v)).collect(),
            y,
            len: fm.rows,
        })
    }

    /// Per-token logits for a time-major feature batch.
    pub fn logits(&self, x: &Matrix<T>, shape: SeqShape) -> Result<Matrix<T>, ModelError> {
        if x.cols() != self.width {
            return Err(ModelError::Width {
                expected: self.width,
                found: x.cols(),
            });
        }
        Ok(self.net.logits(&self.params, x, shape)?)
    }

    /// Per-token location probabilities for the event at `verb_index`.
    pub fn probabilities(&self, s: &AnnotatedSentence, verb_index: usize) -> Result<Vec<f64>, ModelError> {
        let e = self.encode(s, verb_index, None)?;
        let x = Matrix::from_vec(e.len, self.width, e.x)?;
        let z = self.logits(&x, SeqShape::single(e.len))?;
        Ok(z.as_slice().iter().map(|&v| sigmoid(v).as_f64()).collect())
    }

    pub fn predict(&self, s: &AnnotatedSentence, verb_index: usize) -> Result<Prediction, ModelError> {
        let probabilities = self.probabilities(s, verb_index)?;
        Ok(Prediction {
            labels: self.threshold_labels(&probabilities),
            probabilities,
        })
    }

    pub fn threshold_labels(&self, probabilities: &[f64]) -> LabelVector {
        LabelVector::from_bools(probabilities.iter().map(|&p| p >= self.threshold))
    }

    /// Probabilities for many encoded instances, batched by length.
    /// Results come back in input order.
    pub(crate) fn batch_probabilities(&self, items: &[Encoded<T>], batch_size: usize) -> Result<Vec<Vec<f64>>, ModelError> {
        let lengths: Vec<usize> = items.iter().map(|e| e.len).collect();
        let mut out = vec![Vec::new(); items.len()];
        for members in batch::fixed_batches(&lengths, batch_size) {
            let refs: Vec<&Encoded<T>> = members.iter().map(|&i| &items[i]).collect();
            let (x, _, shape) = batch::assemble(&refs, self.width);
            let z = self.logits(&x, shape)?;
            for (b, &i) in members.iter().enumerate() {
                out[i] = (0..shape.steps)
                    .map(|t| sigmoid(z.as_slice()[t * shape.batch + b]).as_f64())
                    .collect();
            }
        }
        Ok(out)
    }

    /// Same model with parameters converted to another precision.
    pub fn cast<U: Real>(&self) -> LinkerModel<U> {
        LinkerModel {
            arch: self.arch,
            features: self.features,
            inventory: self.inventory.clone(),
            embeddings: Arc::clone(&self.embeddings),
            threshold: self.threshold,
            params: self.params.cast(),
            net: self.net.clone(),
            width: self.width,
        }
    }

    pub(crate) fn net(&self) -> &Net {
        &self.net
    }
}

/// Default biLSTM stack over the given features.
pub fn build_bilstm<T: Real>(
    features: FeatureConfig,
    inventory: TagInventory,
    embeddings: Arc<EmbeddingTable>,
    seed: u64,
) -> Result<LinkerModel<T>, ModelError> {
    LinkerModel::new(ArchConfig::Bilstm(BiLstmConfig::default()), features, inventory, embeddings, seed)
}

/// Default residual CNN stack over the given features.
pub fn build_cnn<T: Real>(
    features: FeatureConfig,
    inventory: TagInventory,
    embeddings: Arc<EmbeddingTable>,
    seed: u64,
) -> Result<LinkerModel<T>, ModelError> {
    LinkerModel::new(ArchConfig::ResidualCnn(CnnConfig::default()), features, inventory, embeddings, seed)
}
