//! Token-level and whole-instance metrics, system comparison and ablations.

mod ablation;
mod report;

use std::iter::Sum;
use std::ops::{Add, AddAssign};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ablation::{
    run_ablation, standard_conditions, AblationCell, AblationConfig, AblationReport, Condition, ConditionSummary,
};
pub use report::{Report, ReportRow};

use crate::baseline::{link_nearest, NearestPlaceBaseline};
use crate::corpus::{AnnotatedSentence, Corpus, LabelVector};
use crate::models::{AnyLinker, LinkerModel};
use crate::nn::Real;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction has {pred} labels, gold has {gold}")]
    LengthMismatch { pred: usize, gold: usize },
    #[error("ablation needs at least 2 partitions, got {0}")]
    TooFewPartitions(usize),
    #[error("no ablation conditions given")]
    NoConditions,
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// True positive, false positive and false negative token counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl TokenCounts {
    pub fn metrics(&self) -> TokenMetrics {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        TokenMetrics {
            tp: self.tp,
            fp: self.fp,
            fn_: self.fn_,
            precision,
            recall,
            f1,
        }
    }
}

impl Add for TokenCounts {
    type Output = TokenCounts;

    fn add(self, o: TokenCounts) -> TokenCounts {
        TokenCounts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl AddAssign for TokenCounts {
    fn add_assign(&mut self, o: TokenCounts) {
        *self = *self + o;
    }
}

impl Sum for TokenCounts {
    fn sum<I: Iterator<Item = TokenCounts>>(iter: I) -> Self {
        iter.fold(TokenCounts::default(), Add::add)
    }
}

/// Micro-averaged precision, recall and F1, with 0/0 taken as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TokenMetrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Counts for one instance.
pub fn token_prf(pred: &LabelVector, gold: &LabelVector) -> Result<TokenCounts, EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let mut c = TokenCounts::default();
    for (&p, &g) in pred.as_slice().iter().zip(gold.as_slice()) {
        match (p == 1, g == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(c)
}

/// Sums counts over instances, then computes the rates once.
pub fn aggregate(counts: impl IntoIterator<Item = TokenCounts>) -> TokenMetrics {
    counts.into_iter().sum::<TokenCounts>().metrics()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentenceMetrics {
    pub exact: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl SentenceMetrics {
    pub fn new(exact: usize, total: usize) -> Self {
        SentenceMetrics {
            exact,
            total,
            accuracy: if total == 0 { 0.0 } else { exact as f64 / total as f64 },
        }
    }
}

/// Fraction of `(pred, gold)` instances that agree on every token.
pub fn sentence_exact<'a>(pairs: impl IntoIterator<Item = (&'a LabelVector, &'a LabelVector)>) -> SentenceMetrics {
    let (mut exact, mut total) = (0, 0);
    for (p, g) in pairs {
        total += 1;
        if p == g {
            exact += 1;
        }
    }
    SentenceMetrics::new(exact, total)
}

/// Anything that labels the location tokens of one event.
///
/// Implementations must only use the event identified by `verb_index`;
/// no system other than [`GoldReplay`] may read `s.events`.
pub trait Predictor: Sync {
    fn name(&self) -> String;

    fn predict(&self, s: &AnnotatedSentence, verb_index: usize) -> Result<LabelVector, String>;
}

impl Predictor for NearestPlaceBaseline {
    fn name(&self) -> String {
        "baseline".into()
    }

    fn predict(&self, s: &AnnotatedSentence, verb_index: usize) -> Result<LabelVector, String> {
        if verb_index >= s.len() {
            return Err(format!("verb index {verb_index} out of range"));
        }
        Ok(link_nearest(s, verb_index))
    }
}

/// Returns the annotated gold labels; an upper bound for harness checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct GoldReplay;

impl Predictor for GoldReplay {
    fn name(&self) -> String {
        "gold".into()
    }

    fn predict(&self, s: &AnnotatedSentence, verb_index: usize) -> Result<LabelVector, String> {
        s.events
            .iter()
            .find(|e| e.verb_index == verb_index)
            .map(|e| e.labels(s.len()))
            .ok_or_else(|| format!("no annotated event at token {verb_index}"))
    }
}

/// Never predicts a location.
#[derive(Debug, Clone, Copy, Default)]
pub struct AllZero;

impl Predictor for AllZero {
    fn name(&self) -> String {
        "all-zero".into()
    }

    fn predict(&self, s: &AnnotatedSentence, _verb_index: usize) -> Result<LabelVector, String> {
        Ok(LabelVector::zeros(s.len()))
    }
}

impl<T: Real> Predictor for LinkerModel<T> {
    fn name(&self) -> String {
        self.architecture().name().into()
    }

    fn predict(&self, s: &AnnotatedSentence, verb_index: usize) -> Result<LabelVector, String> {
        LinkerModel::predict(self, s, verb_index)
            .map(|p| p.labels)
            .map_err(|e| e.to_string())
    }
}

impl Predictor for AnyLinker {
    fn name(&self) -> String {
        self.architecture().name().into()
    }

    fn predict(&self, s: &AnnotatedSentence, verb_index: usize) -> Result<LabelVector, String> {
        AnyLinker::predict(self, s, verb_index)
            .map(|p| p.labels)
            .map_err(|e| e.to_string())
    }
}

/// An instance the system got wrong, kept for inspection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceError {
    pub sentence_index: usize,
    pub event_index: usize,
    pub sentence_id: Option<String>,
    pub verb_index: usize,
    pub verb: String,
    pub gold: Vec<usize>,
    pub predicted: Vec<usize>,
    /// Set when the system failed instead of answering.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub system: String,
    pub tokens: TokenMetrics,
    pub sentences: SentenceMetrics,
    pub instances: usize,
    pub failures: usize,
    pub errors: Vec<InstanceError>,
}

/// Runs `predictor` on every (sentence, event) instance of `corpus`.
///
/// A failing prediction is recorded and scored as all zeros. Instances are
/// processed in parallel; results are reduced in corpus order.
pub fn evaluate_model(predictor: &dyn Predictor, corpus: &Corpus) -> Evaluation {
    let instances: Vec<_> = corpus.instances().collect();
    let scored: Vec<(TokenCounts, bool, Option<InstanceError>)> = instances
        .par_iter()
        .map(|inst| {
            let gold = inst.gold();
            let n = inst.sentence.len();
            let (pred, failure) = match predictor.predict(inst.sentence, inst.event.verb_index) {
                Ok(p) if p.len() == n => (p, None),
                Ok(p) => (LabelVector::zeros(n), Some(format!("system returned {} labels for {n} tokens", p.len()))),
                Err(e) => (LabelVector::zeros(n), Some(e)),
            };
            let counts = token_prf(&pred, &gold).expect("lengths agree");
            let exact = pred == gold;
            let error = (!exact || failure.is_some()).then(|| InstanceError {
                sentence_index: inst.sentence_index,
                event_index: inst.event_index,
                sentence_id: inst.sentence.id.clone(),
                verb_index: inst.event.verb_index,
                verb: inst.sentence.tokens[inst.event.verb_index].text.clone(),
                gold: gold.positives().collect(),
                predicted: pred.positives().collect(),
                failure,
            });
            (counts, exact, error)
        })
        .collect();
    let tokens = aggregate(scored.iter().map(|s| s.0));
    let exact = scored.iter().filter(|s| s.1).count();
    let errors: Vec<InstanceError> = scored.into_iter().filter_map(|s| s.2).collect();
    Evaluation {
        system: predictor.name(),
        tokens,
        sentences: SentenceMetrics::new(exact, instances.len()),
        instances: instances.len(),
        failures: errors.iter().filter(|e| e.failure.is_some()).count(),
        errors,
    }
}
