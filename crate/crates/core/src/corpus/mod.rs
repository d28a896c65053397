//! Annotated sentences, the JSONL interchange format, validation,
//! seeded splitting and a synthetic corpus generator.
//!
//! A sentence carries the output of an external annotation pipeline (POS
//! tags, dependency heads and labels, coarse entity labels) together with
//! zero or more events. Every event is anchored by a verb and lists the
//! token positions that name where the event happened. Each
//! (sentence, event) pair is one labeling instance.

mod jsonl;
mod split;
pub mod synth;
mod validate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use jsonl::{load_corpus, parse_corpus, read_sentence_json, save_corpus, scan_corpus, write_corpus, SentenceRecord};
pub use split::{holdout_split, split_corpus, SplitFractions};
pub use synth::{generate_synthetic, synthetic_embeddings, Lexicon, SynthConfig, Template};
pub use validate::{validate_sentence, Violation};

/// Entity labels treated as place names.
pub const PLACE_LABELS: [&str; 3] = ["LOC", "GPE", "FAC"];

pub fn is_place_label(ner: &str) -> bool {
    PLACE_LABELS.contains(&ner)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub text: String,
    pub pos: String,
    pub dep: String,
    /// Syntactic head. The root token points at itself.
    pub head: usize,
    pub ner: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventAnnotation {
    pub verb_index: usize,
    pub location_indices: BTreeSet<usize>,
}

impl EventAnnotation {
    pub fn new(verb_index: usize, locations: impl IntoIterator<Item = usize>) -> Self {
        EventAnnotation {
            verb_index,
            location_indices: locations.into_iter().collect(),
        }
    }

    /// Gold label vector for a sentence of `len` tokens.
    pub fn labels(&self, len: usize) -> LabelVector {
        LabelVector::from_indices(len, self.location_indices.iter().copied())
    }

    /// Number of distinct locations, counting each maximal run of adjacent
    /// token positions as one place name.
    pub fn location_count(&self) -> usize {
        let mut count = 0;
        let mut prev: Option<usize> = None;
        for &i in &self.location_indices {
            if prev.is_none_or(|p| p + 1 != i) {
                count += 1;
            }
            prev = Some(i);
        }
        count
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotatedSentence {
    pub id: Option<String>,
    pub source: Option<String>,
    pub tokens: Vec<Token>,
    pub events: Vec<EventAnnotation>,
}

impl AnnotatedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// The same sentence with events stripped, as a predictor would see it.
    pub fn without_events(&self) -> AnnotatedSentence {
        AnnotatedSentence {
            events: Vec::new(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_sentence(self)
    }
}

/// Binary per-token labels (gold or predicted).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelVector(Vec<u8>);

impl LabelVector {
    pub fn zeros(len: usize) -> Self {
        LabelVector(vec![0; len])
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = vec![0u8; len];
        for i in indices {
            v[i] = 1;
        }
        LabelVector(v)
    }

    /// Builds a vector from arbitrary values, rejecting anything outside {0, 1}.
    pub fn from_values(values: Vec<u8>) -> Option<Self> {
        values.iter().all(|&x| x <= 1).then_some(LabelVector(values))
    }

    pub fn from_bools(values: impl IntoIterator<Item = bool>) -> Self {
        LabelVector(values.into_iter().map(u8::from).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i] == 1
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn positives(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == 1)
            .map(|(i, _)| i)
    }

    pub fn count_positive(&self) -> usize {
        self.0.iter().filter(|&&x| x == 1).count()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub sentences: Vec<AnnotatedSentence>,
    pub provenance: String,
}

impl Corpus {
    pub fn new(sentences: Vec<AnnotatedSentence>, provenance: impl Into<String>) -> Self {
        Corpus {
            sentences,
            provenance: provenance.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Every (sentence, event) pair, in corpus order.
    pub fn instances(&self) -> impl Iterator<Item = Instance<'_>> {
        self.sentences.iter().enumerate().flat_map(|(si, s)| {
            s.events.iter().enumerate().map(move |(ei, e)| Instance {
                sentence_index: si,
                event_index: ei,
                sentence: s,
                event: e,
            })
        })
    }

    pub fn instance_count(&self) -> usize {
        self.sentences.iter().map(|s| s.events.len()).sum()
    }

    /// Returns the first violation found, with the index of the offending sentence.
    pub fn validate(&self) -> Result<(), CorpusError> {
        for (i, s) in self.sentences.iter().enumerate() {
            let violations = s.validate();
            if !violations.is_empty() {
                return Err(CorpusError::Invalid {
                    sentence: i,
                    line: None,
                    violations,
                });
            }
        }
        Ok(())
    }
}

/// One labeling instance: a sentence conditioned on one of its events.
#[derive(Debug, Clone, Copy)]
pub struct Instance<'a> {
    pub sentence_index: usize,
    pub event_index: usize,
    pub sentence: &'a AnnotatedSentence,
    pub event: &'a EventAnnotation,
}

impl Instance<'_> {
    pub fn gold(&self) -> LabelVector {
        self.event.labels(self.sentence.len())
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{}sentence {sentence}: {}", line.map(|l| format!("line {l}: ")).unwrap_or_default(), join_violations(violations))]
    Invalid {
        sentence: usize,
        line: Option<usize>,
        violations: Vec<Violation>,
    },
    #[error("split too small: {total} sentences cannot fill train/val/test with fractions {fractions:?}")]
    SplitTooSmall { total: usize, fractions: (f64, f64, f64) },
    #[error("split fractions must be positive and sum to 1, got {0:?}")]
    BadFractions((f64, f64, f64)),
    #[error("synthetic generator: {0}")]
    Generator(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_match_location_indices() {
        let e = EventAnnotation::new(1, [3, 4]);
        let y = e.labels(6);
        assert_eq!(y.as_slice(), &[0, 0, 0, 1, 1, 0]);
        assert_eq!(y.positives().collect::<Vec<_>>(), vec![3, 4]);
    }

    #[test]
    fn location_count_groups_adjacent_tokens() {
        assert_eq!(EventAnnotation::new(0, []).location_count(), 0);
        assert_eq!(EventAnnotation::new(0, [4, 5]).location_count(), 1);
        assert_eq!(EventAnnotation::new(0, [4, 6, 7]).location_count(), 2);
    }

    #[test]
    fn label_vector_rejects_non_binary() {
        assert!(LabelVector::from_values(vec![0, 1, 2]).is_none());
        assert!(LabelVector::from_values(vec![0, 1]).is_some());
    }
}
