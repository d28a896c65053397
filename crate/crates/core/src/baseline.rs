//! Rule baseline: an event happens at the recognized place name closest to its verb.

use crate::corpus::{is_place_label, AnnotatedSentence, LabelVector};

/// Marks the contiguous same-label place span nearest to `verb_index`.
///
/// Distance is measured in tokens to the nearest token of a span; ties go
/// to the earlier span. Returns all zeros when the sentence has no token
/// labeled as a place.
pub fn link_nearest(s: &AnnotatedSentence, verb_index: usize) -> LabelVector {
    let n = s.len();
    let mut best: Option<(usize, usize, usize)> = None; // (distance, start, end)
    let mut i = 0;
    while i < n {
        let label = &s.tokens[i].ner;
        if !is_place_label(label) {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && s.tokens[i].ner == *label {
            i += 1;
        }
        let end = i;
        let distance = if verb_index < start {
            start - verb_index
        } else if verb_index >= end {
            verb_index - (end - 1)
        } else {
            0
        };
        if best.is_none_or(|(d, _, _)| distance < d) {
            best = Some((distance, start, end));
        }
    }
    match best {
        Some((_, start, end)) => LabelVector::from_indices(n, start..end),
        None => LabelVector::zeros(n),
    }
}

/// [`link_nearest`] packaged as an evaluable system.
#[derive(Debug, Clone, Copy, Default)]
pub struct NearestPlaceBaseline;
