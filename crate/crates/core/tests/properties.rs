mod common;

use eventloc::baseline::link_nearest;
use eventloc::corpus::{parse_corpus, write_corpus, Corpus, LabelVector};
use eventloc::eval::{aggregate, sentence_exact, token_prf, TokenCounts};
use eventloc::features::{featurize, DependencyTree, EmbeddingTable, FeatureConfig, FeatureGroup, TagInventory};
use proptest::prelude::*;

fn labels(len: usize) -> impl Strategy<Value = LabelVector> {
    proptest::collection::vec(any::<bool>(), len).prop_map(LabelVector::from_bools)
}

fn pair() -> impl Strategy<Value = (LabelVector, LabelVector)> {
    (1usize..30).prop_flat_map(|n| (labels(n), labels(n)))
}

fn embeddings(dim: usize) -> EmbeddingTable {
    let words = ["the", "rebels", "attacked", "Homs", "in", "Tal", "said"];
    EmbeddingTable::from_entries(
        dim,
        words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.to_string(), (0..dim).map(|k| ((i * dim + k) as f32).sin()).collect())),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn jsonl_round_trip(n in 1usize..25, seed in any::<u64>()) {
        let corpus = Corpus::new(vec![common::random_sentence(n, seed), common::random_sentence(n + 1, seed ^ 1)], "");
        let mut buf = Vec::new();
        write_corpus(&corpus, &mut buf).unwrap();
        let back = parse_corpus(buf.as_slice()).unwrap();
        prop_assert_eq!(back.sentences, corpus.sentences);
    }

    #[test]
    fn encodings_are_well_formed(n in 1usize..25, seed in any::<u64>(), clip in 1usize..30) {
        let s = common::random_sentence(n, seed);
        let inv = TagInventory::build(&Corpus::new(vec![common::random_sentence(8, seed.wrapping_add(1))], ""));
        let cfg = FeatureConfig { distance_clip: clip, ..FeatureConfig::default().with_embedding_dim(4) };
        let emb = embeddings(4);
        let v = (seed % n as u64) as usize;
        let m = featurize(&s, v, &cfg, &emb, &inv).unwrap();
        prop_assert_eq!(m.rows, n);
        let mut flags = 0.0;
        for i in 0..n {
            for g in [FeatureGroup::Pos, FeatureGroup::Dep, FeatureGroup::Ner] {
                let slice = m.slice(i, g).unwrap();
                prop_assert_eq!(slice.iter().sum::<f64>(), 1.0);
                prop_assert!(slice.iter().all(|&x| x == 0.0 || x == 1.0));
            }
            flags += m.slice(i, FeatureGroup::VerbFlag).unwrap()[0];
            let lin = m.slice(i, FeatureGroup::LinearDistance).unwrap()[0];
            let tree = m.slice(i, FeatureGroup::TreeDistance).unwrap()[0];
            prop_assert!((-1.0..=1.0).contains(&lin));
            prop_assert!((0.0..=1.0).contains(&tree));
        }
        prop_assert_eq!(flags, 1.0);
        let mut no_events = s.clone();
        no_events.events.clear();
        prop_assert_eq!(featurize(&no_events, v, &cfg, &emb, &inv).unwrap(), m);
    }

    #[test]
    fn tree_distance_is_a_metric(n in 1usize..30, seed in any::<u64>()) {
        let s = common::random_sentence(n, seed);
        let t = DependencyTree::new(&s).unwrap();
        for i in 0..n {
            prop_assert_eq!(t.distance(i, i), 0);
            for j in 0..n {
                let d = t.distance(i, j);
                prop_assert_eq!(d, t.distance(j, i));
                if i != j {
                    prop_assert!(d >= 1);
                }
                if t.depth(i) == 0 {
                    prop_assert_eq!(d, t.depth(j));
                }
                for k in 0..n {
                    prop_assert!(t.distance(i, k) <= d + t.distance(j, k));
                }
            }
        }
    }

    #[test]
    fn token_counts_partition_positives((p, g) in pair()) {
        let c = token_prf(&p, &g).unwrap();
        prop_assert_eq!(c.tp + c.fp, p.count_positive());
        prop_assert_eq!(c.tp + c.fn_, g.count_positive());
        let m = c.metrics();
        for x in [m.precision, m.recall, m.f1] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
        prop_assert_eq!(token_prf(&g, &g).unwrap().fp + token_prf(&g, &g).unwrap().fn_, 0);
    }

    #[test]
    fn aggregate_ignores_order(pairs in proptest::collection::vec(pair(), 1..20), rot in 0usize..20) {
        let counts: Vec<TokenCounts> = pairs.iter().map(|(p, g)| token_prf(p, g).unwrap()).collect();
        let mut rotated = counts.clone();
        rotated.rotate_left(rot % counts.len());
        rotated.reverse();
        prop_assert_eq!(aggregate(counts.iter().copied()), aggregate(rotated));
        let s = sentence_exact(pairs.iter().map(|(p, g)| (p, g)));
        prop_assert_eq!(s.total, pairs.len());
        prop_assert_eq!(s.exact, pairs.iter().filter(|(p, g)| p == g).count());
    }

    #[test]
    fn baseline_marks_at_most_one_span(n in 1usize..30, seed in any::<u64>()) {
        let s = common::random_sentence(n, seed);
        let v = (seed % n as u64) as usize;
        let y = link_nearest(&s, v);
        let pos: Vec<usize> = y.positives().collect();
        if let (Some(&a), Some(&b)) = (pos.first(), pos.last()) {
            prop_assert_eq!(b - a + 1, pos.len());
            prop_assert!(pos.iter().all(|&i| s.tokens[i].ner == s.tokens[a].ner));
        }
        let mut other = s.clone();
        for t in &mut other.tokens {
            t.pos = "X".into();
            t.text = "w".into();
        }
        other.events.clear();
        prop_assert_eq!(link_nearest(&other, v), y);
    }
}
