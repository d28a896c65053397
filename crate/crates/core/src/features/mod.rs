//! Per-token feature encoding conditioned on an event verb.
//!
//! Each token row concatenates, in this order: word embedding, one-hot
//! dependency label, one-hot entity label, one-hot POS tag, verb
//! indicator, clipped signed offset to the verb and clipped tree distance
//! to the verb. Disabled groups are dropped from the row entirely.

mod embeddings;
mod tree;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use embeddings::EmbeddingTable;
pub use tree::{dep_tree_distance, DependencyTree};

use crate::corpus::{AnnotatedSentence, Corpus};

pub const UNK: &str = "<UNK>";

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("embedding dimension must be positive")]
    ZeroDimension,
    #[error("line {line}: expected {expected} vector components, found {found}")]
    EmbeddingDimension {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("embedding file is empty")]
    EmptyEmbeddings,
    #[error("feature width mismatch: configuration expects {expected}-dimensional embeddings, table has {found}")]
    EmbeddingWidth { expected: usize, found: usize },
    #[error("at least one feature group must be enabled")]
    NoGroups,
    #[error("distance clip must be at least 1")]
    BadClip,
    #[error("verb index {verb_index} out of range for sentence of {len} tokens")]
    VerbOutOfRange { verb_index: usize, len: usize },
    #[error("dependency heads do not form a tree")]
    MalformedTree,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Label lists for the categorical features, each with `UNK` at slot 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagInventory {
    pub pos_tags: Vec<String>,
    pub dep_labels: Vec<String>,
    pub ner_labels: Vec<String>,
}

impl TagInventory {
    /// Sorted label sets observed in `train`.
    pub fn build(train: &Corpus) -> Self {
        let mut pos = BTreeSet::new();
        let mut dep = BTreeSet::new();
        let mut ner = BTreeSet::new();
        for t in train.sentences.iter().flat_map(|s| &s.tokens) {
            pos.insert(t.pos.clone());
            dep.insert(t.dep.clone());
            ner.insert(t.ner.clone());
        }
        let with_unk = |set: BTreeSet<String>| {
            std::iter::once(UNK.to_string())
                .chain(set.into_iter().filter(|x| x != UNK))
                .collect()
        };
        TagInventory {
            pos_tags: with_unk(pos),
            dep_labels: with_unk(dep),
            ner_labels: with_unk(ner),
        }
    }

    fn slot(labels: &[String], label: &str) -> usize {
        labels[1..]
            .binary_search_by(|x| x.as_str().cmp(label))
            .map_or(0, |i| i + 1)
    }

    pub fn pos_index(&self, tag: &str) -> usize {
        Self::slot(&self.pos_tags, tag)
    }

    pub fn dep_index(&self, label: &str) -> usize {
        Self::slot(&self.dep_labels, label)
    }

    pub fn ner_index(&self, label: &str) -> usize {
        Self::slot(&self.ner_labels, label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Embedding,
    Dep,
    Ner,
    Pos,
    VerbFlag,
    LinearDistance,
    TreeDistance,
}

impl FeatureGroup {
    pub const ORDER: [FeatureGroup; 7] = [
        FeatureGroup::Embedding,
        FeatureGroup::Dep,
        FeatureGroup::Ner,
        FeatureGroup::Pos,
        FeatureGroup::VerbFlag,
        FeatureGroup::LinearDistance,
        FeatureGroup::TreeDistance,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FeatureGroup::Embedding => "embedding",
            FeatureGroup::Dep => "dep",
            FeatureGroup::Ner => "ner",
            FeatureGroup::Pos => "pos",
            FeatureGroup::VerbFlag => "verb_flag",
            FeatureGroup::LinearDistance => "linear_distance",
            FeatureGroup::TreeDistance => "tree_distance",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub embedding: bool,
    pub dep: bool,
    pub pos: bool,
    pub ner: bool,
    pub verb_flag: bool,
    pub linear_distance: bool,
    pub tree_distance: bool,
    /// Offsets and tree distances saturate at this many tokens.
    pub distance_clip: usize,
    pub embedding_dim: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            embedding: true,
            dep: true,
            pos: true,
            ner: true,
            verb_flag: true,
            linear_distance: true,
            tree_distance: true,
            distance_clip: 20,
            embedding_dim: 300,
        }
    }
}

impl FeatureConfig {
    pub fn with_embedding_dim(mut self, dim: usize) -> Self {
        self.embedding_dim = dim;
        self
    }

    pub fn enabled(&self, group: FeatureGroup) -> bool {
        match group {
            FeatureGroup::Embedding => self.embedding,
            FeatureGroup::Dep => self.dep,
            FeatureGroup::Ner => self.ner,
            FeatureGroup::Pos => self.pos,
            FeatureGroup::VerbFlag => self.verb_flag,
            FeatureGroup::LinearDistance => self.linear_distance,
            FeatureGroup::TreeDistance => self.tree_distance,
        }
    }

    pub fn set(&mut self, group: FeatureGroup, on: bool) {
        let slot = match group {
            FeatureGroup::Embedding => &mut self.embedding,
            FeatureGroup::Dep => &mut self.dep,
            FeatureGroup::Ner => &mut self.ner,
            FeatureGroup::Pos => &mut self.pos,
            FeatureGroup::VerbFlag => &mut self.verb_flag,
            FeatureGroup::LinearDistance => &mut self.linear_distance,
            FeatureGroup::TreeDistance => &mut self.tree_distance,
        };
        *slot = on;
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if !FeatureGroup::ORDER.iter().any(|&g| self.enabled(g)) {
            return Err(FeatureError::NoGroups);
        }
        if self.distance_clip < 1 {
            return Err(FeatureError::BadClip);
        }
        if self.embedding && self.embedding_dim == 0 {
            return Err(FeatureError::ZeroDimension);
        }
        Ok(())
    }

    /// Column slices of each enabled group, in row order.
    pub fn layout(&self, inv: &TagInventory) -> FeatureLayout {
        let mut slices = Vec::new();
        let mut start = 0;
        for group in FeatureGroup::ORDER {
            if !self.enabled(group) {
                continue;
            }
            let width = match group {
                FeatureGroup::Embedding => self.embedding_dim,
                FeatureGroup::Dep => inv.dep_labels.len(),
                FeatureGroup::Ner => inv.ner_labels.len(),
                FeatureGroup::Pos => inv.pos_tags.len(),
                _ => 1,
            };
            slices.push((group, start..start + width));
            start += width;
        }
        FeatureLayout {
            slices,
            width: start,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLayout {
    pub slices: Vec<(FeatureGroup, Range<usize>)>,
    pub width: usize,
}

impl FeatureLayout {
    pub fn range(&self, group: FeatureGroup) -> Option<Range<usize>> {
        self.slices
            .iter()
            .find(|(g, _)| *g == group)
            .map(|(_, r)| r.clone())
    }
}

/// Dense per-token encoding of one sentence for one verb.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub width: usize,
    pub verb_index: usize,
    pub layout: FeatureLayout,
    /// Row-major, `rows * width` values.
    pub values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn slice(&self, i: usize, group: FeatureGroup) -> Option<&[f64]> {
        self.layout.range(group).map(|r| &self.row(i)[r])
    }
}

/// Signed offset of token `i` from the verb, clipped to ±`clip` and scaled to [-1, 1].
pub fn linear_offset(i: usize, verb_index: usize, clip: usize) -> f64 {
    let r = clip as i64;
    let d = (i as i64 - verb_index as i64).clamp(-r, r);
    d as f64 / r as f64
}

/// Encodes `s` conditioned on the verb at `verb_index`.
///
/// Only the sentence's tokens are read; its event annotations never influence the features.
pub fn featurize(
    s: &AnnotatedSentence,
    verb_index: usize,
    cfg: &FeatureConfig,
    emb: &EmbeddingTable,
    inv: &TagInventory,
) -> Result<FeatureMatrix, FeatureError> {
    cfg.validate()?;
    let n = s.len();
    if verb_index >= n {
        return Err(FeatureError::VerbOutOfRange { verb_index, len: n });
    }
    if cfg.embedding && emb.dim() != cfg.embedding_dim {
        return Err(FeatureError::EmbeddingWidth {
            expected: cfg.embedding_dim,
            found: emb.dim(),
        });
    }
    let tree_dist = if cfg.tree_distance {
        let tree = DependencyTree::new(s).ok_or(FeatureError::MalformedTree)?;
        Some(tree.distances_from(verb_index))
    } else {
        None
    };
    let layout = cfg.layout(inv);
    let width = layout.width;
    let clip = cfg.distance_clip;
    let mut values = vec![0.0; n * width];
    for (i, tok) in s.tokens.iter().enumerate() {
        let row = &mut values[i * width..(i + 1) * width];
        for (group, range) in &layout.slices {
            let cell = &mut row[range.clone()];
            match group {
                FeatureGroup::Embedding => {
                    for (c, &x) in cell.iter_mut().zip(emb.lookup(&tok.text)) {
                        *c = f64::from(x);
                    }
                }
                FeatureGroup::Dep => cell[inv.dep_index(&tok.dep)] = 1.0,
                FeatureGroup::Ner => cell[inv.ner_index(&tok.ner)] = 1.0,
                FeatureGroup::Pos => cell[inv.pos_index(&tok.pos)] = 1.0,
                FeatureGroup::VerbFlag => cell[0] = if i == verb_index { 1.0 } else { 0.0 },
                FeatureGroup::LinearDistance => cell[0] = linear_offset(i, verb_index, clip),
                FeatureGroup::TreeDistance => {
                    let d = tree_dist.as_ref().expect("computed when enabled")[i];
                    cell[0] = d.min(clip) as f64 / clip as f64;
                }
            }
        }
    }
    Ok(FeatureMatrix {
        rows: n,
        width,
        verb_index,
        layout,
        values,
    })
}
