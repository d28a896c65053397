use std::fmt;

use super::AnnotatedSentence;

/// A broken sentence invariant. Violations are data: validation collects
/// all of them instead of stopping at the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptySentence,
    IndexMismatch { token: usize, found: usize },
    EmptyField { token: usize, field: &'static str },
    HeadOutOfRange { token: usize, head: usize },
    NoRoot,
    MultipleRoots { roots: Vec<usize> },
    Cycle,
    VerbOutOfRange { event: usize, verb_index: usize },
    LocationOutOfRange { event: usize, index: usize },
    VerbIsLocation { event: usize },
    LengthMismatch { field: &'static str, expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptySentence => write!(f, "sentence has no tokens"),
            Violation::IndexMismatch { token, found } => {
                write!(f, "token {token}: index field is {found}")
            }
            Violation::EmptyField { token, field } => write!(f, "token {token}: empty {field}"),
            Violation::HeadOutOfRange { token, head } => {
                write!(f, "token {token}: head {head} out of range")
            }
            Violation::NoRoot => write!(f, "no root"),
            Violation::MultipleRoots { .. } => write!(f, "multiple roots"),
            Violation::Cycle => write!(f, "head pointers contain cycle"),
            Violation::VerbOutOfRange { event, .. } => {
                write!(f, "event {event}: verb_index out of range")
            }
            Violation::LocationOutOfRange { event, index } => {
                write!(f, "event {event}: location index {index} out of range")
            }
            Violation::VerbIsLocation { event } => {
                write!(f, "event {event}: verb_index in location_indices")
            }
            Violation::LengthMismatch {
                field,
                expected,
                found,
            } => write!(f, "\"{field}\" has {found} entries, expected {expected}"),
        }
    }
}

/// Checks every sentence invariant. Empty result iff the sentence is well formed.
pub fn validate_sentence(s: &AnnotatedSentence) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = s.tokens.len();
    if n == 0 {
        out.push(Violation::EmptySentence);
    }

    let mut heads_in_range = true;
    for (i, t) in s.tokens.iter().enumerate() {
        if t.index != i {
            out.push(Violation::IndexMismatch {
                token: i,
                found: t.index,
            });
        }
        for (field, value) in [("pos", &t.pos), ("dep", &t.dep), ("ner", &t.ner)] {
            if value.is_empty() {
                out.push(Violation::EmptyField { token: i, field });
            }
        }
        if t.head >= n {
            heads_in_range = false;
            out.push(Violation::HeadOutOfRange {
                token: i,
                head: t.head,
            });
        }
    }

    if heads_in_range && n > 0 {
        check_tree(s, &mut out);
    }

    for (e, ev) in s.events.iter().enumerate() {
        if ev.verb_index >= n {
            out.push(Violation::VerbOutOfRange {
                event: e,
                verb_index: ev.verb_index,
            });
        }
        for &i in &ev.location_indices {
            if i >= n {
                out.push(Violation::LocationOutOfRange { event: e, index: i });
            }
        }
        if ev.location_indices.contains(&ev.verb_index) {
            out.push(Violation::VerbIsLocation { event: e });
        }
    }
    out
}

fn check_tree(s: &AnnotatedSentence, out: &mut Vec<Violation>) {
    let n = s.tokens.len();
    let heads: Vec<usize> = s.tokens.iter().map(|t| t.head).collect();
    let roots: Vec<usize> = (0..n).filter(|&i| heads[i] == i).collect();
    match roots.len() {
        0 => out.push(Violation::NoRoot),
        1 => {}
        _ => out.push(Violation::MultipleRoots {
            roots: roots.clone(),
        }),
    }

    // A token is fine if climbing its heads reaches a fixed point within n steps.
    // state: 0 = unknown, 1 = on current path, 2 = reaches a root
    let mut state = vec![0u8; n];
    for &r in &roots {
        state[r] = 2;
    }
    let mut cyclic = false;
    let mut path = Vec::new();
    for start in 0..n {
        let mut cur = start;
        path.clear();
        while state[cur] == 0 {
            state[cur] = 1;
            path.push(cur);
            cur = heads[cur];
        }
        if state[cur] == 1 {
            cyclic = true;
        }
        let resolved = if state[cur] == 2 { 2 } else { 3 };
        for &p in &path {
            state[p] = resolved;
        }
    }
    if cyclic || state.contains(&3) {
        out.push(Violation::Cycle);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EventAnnotation, Token};

    fn sentence(heads: &[usize]) -> AnnotatedSentence {
        AnnotatedSentence {
            tokens: heads
                .iter()
                .enumerate()
                .map(|(i, &h)| Token {
                    index: i,
                    text: format!("w{i}"),
                    pos: "NOUN".into(),
                    dep: "dep".into(),
                    head: h,
                    ner: "O".into(),
                })
                .collect(),
            ..Default::default()
        }
    }

    fn messages(s: &AnnotatedSentence) -> Vec<String> {
        validate_sentence(s).iter().map(|v| v.to_string()).collect()
    }

    #[test]
    fn well_formed_two_tokens() {
        let mut s = sentence(&[1, 1]);
        s.events.push(EventAnnotation::new(1, []));
        assert!(validate_sentence(&s).is_empty());
    }

    #[test]
    fn verb_out_of_range() {
        let mut s = sentence(&[1, 1, 1]);
        s.events.push(EventAnnotation::new(7, []));
        assert_eq!(messages(&s), vec!["event 0: verb_index out of range"]);
    }

    #[test]
    fn cycle_among_non_roots() {
        let s = sentence(&[1, 0, 2]);
        assert_eq!(messages(&s), vec!["head pointers contain cycle"]);
    }

    #[test]
    fn multiple_roots() {
        let s = sentence(&[0, 1]);
        assert_eq!(messages(&s), vec!["multiple roots"]);
    }

    #[test]
    fn no_root_is_also_a_cycle() {
        let s = sentence(&[1, 0]);
        assert_eq!(messages(&s), vec!["no root", "head pointers contain cycle"]);
    }

    #[test]
    fn long_chain_into_cycle() {
        // 0 -> 1 -> 2 -> 3 -> 2, root 4
        let s = sentence(&[1, 2, 3, 2, 4]);
        assert_eq!(messages(&s), vec!["head pointers contain cycle"]);
    }

    #[test]
    fn location_problems() {
        let mut s = sentence(&[1, 1, 1]);
        s.events.push(EventAnnotation::new(1, [1, 5]));
        assert_eq!(
            messages(&s),
            vec![
                "event 0: location index 5 out of range",
                "event 0: verb_index in location_indices"
            ]
        );
    }

    #[test]
    fn empty_fields_and_bad_head() {
        let mut s = sentence(&[1, 9]);
        s.tokens[0].pos.clear();
        assert_eq!(
            messages(&s),
            vec!["token 0: empty pos", "token 1: head 9 out of range"]
        );
    }
}
