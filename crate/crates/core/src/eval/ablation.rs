use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{evaluate_model, EvalError, SentenceMetrics, TokenMetrics};
use crate::corpus::{split_corpus, Corpus, SentenceRecord, SplitFractions};
use crate::features::{EmbeddingTable, FeatureConfig, FeatureGroup, TagInventory};
use crate::models::{train, ArchConfig, LinkerModel, TrainConfig};

/// A named feature configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub features: FeatureConfig,
}

impl Condition {
    pub fn new(name: impl Into<String>, features: FeatureConfig) -> Self {
        Condition {
            name: name.into(),
            features,
        }
    }

    /// Resolves one of the [`standard_conditions`] names against `base`.
    pub fn by_name(name: &str, base: FeatureConfig) -> Option<Condition> {
        standard_conditions(base).into_iter().find(|c| c.name == name)
    }
}

/// Full model, each feature family removed in turn, and embeddings alone.
pub fn standard_conditions(base: FeatureConfig) -> Vec<Condition> {
    let without = |groups: &[FeatureGroup]| {
        let mut f = base;
        for &g in groups {
            f.set(g, false);
        }
        f
    };
    let mut only = base;
    for g in FeatureGroup::ORDER {
        only.set(g, g == FeatureGroup::Embedding);
    }
    vec![
        Condition::new("full", base),
        Condition::new("-embeddings", without(&[FeatureGroup::Embedding])),
        Condition::new(
            "-distances",
            without(&[FeatureGroup::LinearDistance, FeatureGroup::TreeDistance]),
        ),
        Condition::new("-pos", without(&[FeatureGroup::Pos])),
        Condition::new("-dep", without(&[FeatureGroup::Dep])),
        Condition::new("-ner", without(&[FeatureGroup::Ner])),
        Condition::new("embeddings-only", only),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationConfig {
    pub n_partitions: usize,
    /// Partition `p` splits and trains with seed `base_seed + p`.
    pub base_seed: u64,
    pub fractions: SplitFractions,
    pub arch: ArchConfig,
    pub train: TrainConfig,
    /// Finished cells are stored here and reused on the next run.
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub condition: String,
    pub partition: usize,
    pub seed: u64,
    /// Digest of the train/val/test membership of this partition.
    pub fingerprint: String,
    pub tokens: Option<TokenMetrics>,
    pub sentences: Option<SentenceMetrics>,
    pub best_epoch: Option<usize>,
    /// Why the cell has no metrics.
    pub error: Option<String>,
    key: String,
}

impl AblationCell {
    pub fn is_valid(&self) -> bool {
        self.tokens.is_some()
    }

    pub fn f1(&self) -> Option<f64> {
        self.tokens.map(|t| t.f1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub valid_cells: usize,
    pub mean_f1: f64,
    pub min_f1: f64,
    pub max_f1: f64,
    pub std_f1: f64,
    /// `mean_f1` minus the reference (first) condition's mean.
    pub delta_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub reference: String,
    pub partitions: usize,
    pub cells: Vec<AblationCell>,
    pub summaries: Vec<ConditionSummary>,
}

impl AblationReport {
    pub fn summary(&self, condition: &str) -> Option<&ConditionSummary> {
        self.summaries.iter().find(|s| s.condition == condition)
    }

    pub fn table(&self) -> String {
        use std::fmt::Write;
        let w = self.summaries.iter().map(|s| s.condition.len()).max().unwrap_or(0).max(9);
        let mut out = String::new();
        writeln!(out, "{:<w$}  {:>7}  {:>7}  {:>7}  {:>7}  {:>8}  {:>5}", "Condition", "mean F1", "min", "max", "std", "delta", "cells")
            .unwrap();
        for s in &self.summaries {
            writeln!(
                out,
                "{:<w$}  {:>7.3}  {:>7.3}  {:>7.3}  {:>7.3}  {:>+8.3}  {:>5}",
                s.condition, s.mean_f1, s.min_f1, s.max_f1, s.std_f1, s.delta_f1, s.valid_cells
            )
            .unwrap();
        }
        for c in self.cells.iter().filter(|c| !c.is_valid()) {
            writeln!(
                out,
                "invalid cell {} partition {}: {}",
                c.condition,
                c.partition,
                c.error.as_deref().unwrap_or("unknown")
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn fingerprint(splits: [&Corpus; 3]) -> String {
    let mut h = Sha256::new();
    for (i, c) in splits.iter().enumerate() {
        h.update([b'#', i as u8]);
        for s in &c.sentences {
            let rec = serde_json::to_vec(&SentenceRecord::from(s)).expect("record serializes");
            h.update((rec.len() as u64).to_le_bytes());
            h.update(&rec);
        }
    }
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn cell_key(cond: &Condition, cfg: &AblationConfig, seed: u64, fp: &str) -> String {
    let desc = serde_json::json!({
        "features": cond.features,
        "arch": cfg.arch,
        "train": cfg.train,
        "seed": seed,
        "fingerprint": fp,
    });
    hex(&Sha256::digest(desc.to_string().as_bytes()))
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Trains and tests one fresh model per (condition, partition) cell.
///
/// Every condition sees the same partitions. A cell whose training fails is
/// kept with its error and left out of the summary statistics.
pub fn run_ablation(
    corpus: &Corpus,
    conditions: &[Condition],
    embeddings: Arc<EmbeddingTable>,
    cfg: &AblationConfig,
    mut on_cell: impl FnMut(&AblationCell),
) -> Result<AblationReport, EvalError> {
    if cfg.n_partitions < 2 {
        return Err(EvalError::TooFewPartitions(cfg.n_partitions));
    }
    if conditions.is_empty() {
        return Err(EvalError::NoConditions);
    }
    if let Some(dir) = &cfg.cache_dir {
        fs::create_dir_all(dir)?;
    }
    let mut cells = Vec::new();
    for p in 0..cfg.n_partitions {
        let seed = cfg.base_seed + p as u64;
        let (tr, va, te) = split_corpus(corpus, cfg.fractions, seed)?;
        let fp = fingerprint([&tr, &va, &te]);
        let inventory = TagInventory::build(&tr);
        for cond in conditions {
            let key = cell_key(cond, cfg, seed, &fp);
            let path = cfg
                .cache_dir
                .as_ref()
                .map(|d| d.join(format!("{}-p{p}.json", slug(&cond.name))));
            let cached = path
                .as_ref()
                .and_then(|p| fs::read_to_string(p).ok())
                .and_then(|s| serde_json::from_str::<AblationCell>(&s).ok())
                .filter(|c| c.key == key && c.is_valid());
            let cell = match cached {
                Some(c) => {
                    info!("reusing cached cell {} partition {p}", cond.name);
                    c
                }
                None => {
                    let cell = run_cell(cond, &inventory, &embeddings, cfg, seed, [&tr, &va, &te], p, &fp, key);
                    if let Some(path) = &path {
                        fs::write(path, serde_json::to_string_pretty(&cell).expect("cell serializes"))?;
                    }
                    cell
                }
            };
            on_cell(&cell);
            cells.push(cell);
        }
    }
    let summaries = summarize(conditions, &cells);
    Ok(AblationReport {
        reference: conditions[0].name.clone(),
        partitions: cfg.n_partitions,
        cells,
        summaries,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    cond: &Condition,
    inventory: &TagInventory,
    embeddings: &Arc<EmbeddingTable>,
    cfg: &AblationConfig,
    seed: u64,
    [tr, va, te]: [&Corpus; 3],
    partition: usize,
    fp: &str,
    key: String,
) -> AblationCell {
    let mut cell = AblationCell {
        condition: cond.name.clone(),
        partition,
        seed,
        fingerprint: fp.to_string(),
        tokens: None,
        sentences: None,
        best_epoch: None,
        error: None,
        key,
    };
    let mut features = cond.features;
    features.embedding_dim = embeddings.dim();
    let result = LinkerModel::<f32>::new(cfg.arch, features, inventory.clone(), Arc::clone(embeddings), seed)
        .and_then(|mut model| {
            let tc = TrainConfig { seed, ..cfg.train };
            let history = train(&mut model, tr, va, &tc, |_| {})?;
            Ok((model, history))
        });
    match result {
        Ok((model, history)) => {
            let ev = evaluate_model(&model, te);
            info!("cell {} partition {partition}: test F1 {:.4}", cond.name, ev.tokens.f1);
            cell.tokens = Some(ev.tokens);
            cell.sentences = Some(ev.sentences);
            cell.best_epoch = Some(history.best_epoch);
        }
        Err(e) => {
            warn!("cell {} partition {partition} failed: {e}", cond.name);
            cell.error = Some(e.to_string());
        }
    }
    cell
}

fn summarize(conditions: &[Condition], cells: &[AblationCell]) -> Vec<ConditionSummary> {
    let mut out: Vec<ConditionSummary> = conditions
        .iter()
        .map(|c| {
            let f1: Vec<f64> = cells
                .iter()
                .filter(|cell| cell.condition == c.name)
                .filter_map(AblationCell::f1)
                .collect();
            let n = f1.len();
            let mean = if n == 0 { f64::NAN } else { f1.iter().sum::<f64>() / n as f64 };
            let var = if n == 0 {
                f64::NAN
            } else {
                f1.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64
            };
            ConditionSummary {
                condition: c.name.clone(),
                valid_cells: n,
                mean_f1: mean,
                min_f1: f1.iter().copied().fold(f64::INFINITY, f64::min),
                max_f1: f1.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                std_f1: var.sqrt(),
                delta_f1: 0.0,
            }
        })
        .collect();
    let reference = out[0].mean_f1;
    for s in &mut out {
        s.delta_f1 = s.mean_f1 - reference;
    }
    out
}
