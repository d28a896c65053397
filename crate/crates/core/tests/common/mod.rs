#![allow(dead_code)]

use std::path::{Path, PathBuf};

use eventloc::corpus::{
    generate_synthetic, load_corpus, AnnotatedSentence, Corpus, EventAnnotation, SynthConfig, Token,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn load_fixture(name: &str) -> Corpus {
    load_corpus(fixture(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// The first sentences of a synthetic corpus, cut so that exactly `n` events remain.
pub fn corpus_with_instances(n: usize, seed: u64) -> Corpus {
    let full = generate_synthetic(&SynthConfig::with_sentences(n), seed).expect("synthetic corpus");
    let mut sentences = Vec::new();
    let mut count = 0;
    for mut s in full.sentences {
        if count == n {
            break;
        }
        s.events.truncate(n - count);
        count += s.events.len();
        if !s.events.is_empty() {
            sentences.push(s);
        }
    }
    assert_eq!(count, n, "not enough events in the synthetic corpus");
    Corpus::new(sentences, format!("synthetic-{n}"))
}

const POS: &[&str] = &["NOUN", "VERB", "ADP", "DET", "PROPN", "ADJ", "PUNCT"];
const DEP: &[&str] = &["nsubj", "dobj", "prep", "pobj", "det", "amod", "punct", "compound"];
const NER: &[&str] = &["O", "O", "O", "GPE", "LOC", "FAC", "ORG", "NORP"];
const WORDS: &[&str] = &["the", "rebels", "attacked", "Homs", "in", "Tal", "Abyad", ",", "said", "town"];

/// Random heads forming a single-rooted tree over `n` tokens.
pub fn random_heads(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut heads = vec![0; n];
    heads[order[0]] = order[0];
    for k in 1..n {
        heads[order[k]] = order[rng.random_range(0..k)];
    }
    heads
}

/// A valid random sentence of `n` tokens with up to three events.
pub fn random_sentence(n: usize, seed: u64) -> AnnotatedSentence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let heads = random_heads(n, &mut rng);
    let tokens = (0..n)
        .map(|i| Token {
            index: i,
            text: WORDS[rng.random_range(0..WORDS.len())].to_string(),
            pos: POS[rng.random_range(0..POS.len())].to_string(),
            dep: if heads[i] == i {
                "ROOT".to_string()
            } else {
                DEP[rng.random_range(0..DEP.len())].to_string()
            },
            head: heads[i],
            ner: NER[rng.random_range(0..NER.len())].to_string(),
        })
        .collect();
    let events = (0..rng.random_range(0..=3usize.min(n)))
        .map(|_| {
            let v = rng.random_range(0..n);
            let locs: Vec<usize> = (0..n).filter(|&i| i != v && rng.random_bool(0.2)).collect();
            EventAnnotation::new(v, locs)
        })
        .collect();
    AnnotatedSentence {
        id: Some(format!("r{seed}")),
        tokens,
        events,
        ..Default::default()
    }
}
