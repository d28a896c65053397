use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn new(train: f64, val: f64, test: f64) -> Self {
        SplitFractions { train, val, test }
    }

    fn as_tuple(&self) -> (f64, f64, f64) {
        (self.train, self.val, self.test)
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions::new(0.8, 0.1, 0.1)
    }
}

/// Shuffles sentence order with `seed` and cuts it into train/val/test.
///
/// Sentences are the unit of assignment, so all events of a sentence stay
/// in the same split. Split sizes are rounded from the fractions with the
/// test split taking the remainder; every split must get at least one
/// sentence.
pub fn split_corpus(
    corpus: &Corpus,
    fractions: SplitFractions,
    seed: u64,
) -> Result<(Corpus, Corpus, Corpus), CorpusError> {
    let (a, b, c) = fractions.as_tuple();
    if !(a > 0.0 && b > 0.0 && c > 0.0) || ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(CorpusError::BadFractions(fractions.as_tuple()));
    }
    let n = corpus.len();
    let n_train = (n as f64 * a).round() as usize;
    let n_val = (n as f64 * b).round() as usize;
    if n_train == 0 || n_val == 0 || n_train + n_val >= n {
        return Err(CorpusError::SplitTooSmall {
            total: n,
            fractions: fractions.as_tuple(),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let pick = |idx: &[usize], tag: &str| {
        Corpus::new(
            idx.iter().map(|&i| corpus.sentences[i].clone()).collect(),
            format!("{}#{tag}(seed={seed})", corpus.provenance),
        )
    };
    Ok((
        pick(&order[..n_train], "train"),
        pick(&order[n_train..n_train + n_val], "val"),
        pick(&order[n_train + n_val..], "test"),
    ))
}

/// Shuffles with `seed` and holds out `fraction` of the sentences (at least
/// one) as a second corpus; the rest stays in the first.
pub fn holdout_split(corpus: &Corpus, fraction: f64, seed: u64) -> Result<(Corpus, Corpus), CorpusError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(CorpusError::BadFractions((1.0 - fraction, fraction, 0.0)));
    }
    let n = corpus.len();
    let n_held = ((n as f64 * fraction).round() as usize).max(1);
    if n_held >= n {
        return Err(CorpusError::SplitTooSmall {
            total: n,
            fractions: (1.0 - fraction, fraction, 0.0),
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |idx: &[usize], tag: &str| {
        Corpus::new(
            idx.iter().map(|&i| corpus.sentences[i].clone()).collect(),
            format!("{}#{tag}(seed={seed})", corpus.provenance),
        )
    };
    Ok((pick(&order[n_held..], "train"), pick(&order[..n_held], "val")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AnnotatedSentence, Token};

    fn corpus(n: usize) -> Corpus {
        let sentences = (0..n)
            .map(|i| AnnotatedSentence {
                id: Some(format!("s{i}")),
                tokens: vec![Token {
                    index: 0,
                    text: format!("w{i}"),
                    pos: "X".into(),
                    dep: "ROOT".into(),
                    head: 0,
                    ner: "O".into(),
                }],
                ..Default::default()
            })
            .collect();
        Corpus::new(sentences, "test")
    }

    fn ids(c: &Corpus) -> Vec<String> {
        c.sentences.iter().map(|s| s.id.clone().unwrap()).collect()
    }

    #[test]
    fn holdout_is_disjoint() {
        let c = corpus(10);
        let (a, b) = holdout_split(&c, 0.2, 3).unwrap();
        assert_eq!((a.len(), b.len()), (8, 2));
        let mut all: Vec<String> = ids(&a).into_iter().chain(ids(&b)).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 10);
        assert!(holdout_split(&corpus(1), 0.5, 0).is_err());
        assert!(holdout_split(&c, 1.0, 0).is_err());
    }

    #[test]
    fn sizes_and_determinism() {
        let c = corpus(10);
        let (tr, va, te) = split_corpus(&c, SplitFractions::default(), 42).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (8, 1, 1));
        let (tr2, va2, te2) = split_corpus(&c, SplitFractions::default(), 42).unwrap();
        assert_eq!(ids(&tr), ids(&tr2));
        assert_eq!(ids(&va), ids(&va2));
        assert_eq!(ids(&te), ids(&te2));
    }

    #[test]
    fn partitions_without_overlap() {
        let c = corpus(37);
        let (tr, va, te) = split_corpus(&c, SplitFractions::new(0.6, 0.2, 0.2), 3).unwrap();
        let mut all: Vec<String> = ids(&tr).into_iter().chain(ids(&va)).chain(ids(&te)).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 37);
    }

    #[test]
    fn other_seed_changes_membership() {
        let c = corpus(10);
        let (_, va, te) = split_corpus(&c, SplitFractions::default(), 43).unwrap();
        assert_eq!((va.len(), te.len()), (1, 1));
        let differs = (0..20u64).any(|s| {
            let a = split_corpus(&c, SplitFractions::default(), s).unwrap();
            let b = split_corpus(&c, SplitFractions::default(), s + 1).unwrap();
            ids(&a.0) != ids(&b.0)
        });
        assert!(differs);
    }

    #[test]
    fn too_small() {
        let err = split_corpus(&corpus(2), SplitFractions::default(), 1).unwrap_err();
        assert!(err.to_string().starts_with("split too small"));
    }

    #[test]
    fn bad_fractions() {
        assert!(matches!(
            split_corpus(&corpus(10), SplitFractions::new(0.5, 0.5, 0.1), 1),
            Err(CorpusError::BadFractions(_))
        ));
    }
}
