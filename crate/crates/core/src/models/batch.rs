use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::nn::{Matrix, Real, SeqShape};

/// One featurized (sentence, verb) instance.
#[derive(Debug, Clone)]
pub(crate) struct Encoded<T> {
    /// `len x width`, row-major
    pub x: Vec<T>,
    /// 0/1 targets, empty when unlabeled
    pub y: Vec<T>,
    pub len: usize,
}

/// Groups instance indices into batches whose members share one length.
/// Members and batch order are shuffled with `rng`.
pub(crate) fn length_batches<R: Rng + ?Sized>(lengths: &[usize], batch_size: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut batches = ordered_batches(lengths, batch_size, Some(rng));
    batches.shuffle(rng);
    batches
}

/// Deterministic length batches in ascending length order.
pub(crate) fn fixed_batches(lengths: &[usize], batch_size: usize) -> Vec<Vec<usize>> {
    ordered_batches::<rand_chacha::ChaCha8Rng>(lengths, batch_size, None)
}

fn ordered_batches<R: Rng + ?Sized>(lengths: &[usize], batch_size: usize, mut rng: Option<&mut R>) -> Vec<Vec<usize>> {
    assert!(batch_size > 0, "batch size must be positive");
    let mut buckets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &n) in lengths.iter().enumerate() {
        buckets.entry(n).or_default().push(i);
    }
    let mut batches = Vec::new();
    for (_, mut members) in buckets {
        if let Some(rng) = rng.as_deref_mut() {
            members.shuffle(rng);
        }
        batches.extend(members.chunks(batch_size).map(<[usize]>::to_vec));
    }
    batches
}

/// Stacks equal-length instances time-major.
pub(crate) fn assemble<T: Real>(items: &[&Encoded<T>], width: usize) -> (Matrix<T>, Vec<T>, SeqShape) {
    let steps = items[0].len;
    let batch = items.len();
    debug_assert!(items.iter().all(|e| e.len == steps));
    let shape = SeqShape::new(steps, batch);
    let mut x = Matrix::zeros(shape.rows(), width);
    let mut y = vec![T::zero(); if items[0].y.is_empty() { 0 } else { shape.rows() }];
    for (b, e) in items.iter().enumerate() {
        for t in 0..steps {
            let r = t * batch + b;
            x.row_mut(r).copy_from_slice(&e.x[t * width..(t + 1) * width]);
            if !y.is_empty() {
                y[r] = e.y[t];
            }
        }
    }
    (x, y, shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn batches_cover_every_index_once() {
        let lengths = [3, 5, 3, 3, 7, 5, 3, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batches = length_batches(&lengths, 2, &mut rng);
        let mut seen: Vec<usize> = batches.iter().flatten().copied().collect();
        seen.sort();
        assert_eq!(seen, (0..lengths.len()).collect::<Vec<_>>());
        for b in &batches {
            assert!(b.len() <= 2);
            assert!(b.iter().all(|&i| lengths[i] == lengths[b[0]]));
        }
    }

    #[test]
    fn fixed_batches_are_stable() {
        let lengths = [4, 2, 4, 2];
        assert_eq!(fixed_batches(&lengths, 8), vec![vec![1, 3], vec![0, 2]]);
    }

    #[test]
    fn assemble_is_time_major() {
        let a = Encoded { x: vec![1.0f64, 2.0], y: vec![0.0, 1.0], len: 2 };
        let b = Encoded { x: vec![3.0f64, 4.0], y: vec![1.0, 1.0], len: 2 };
        let (x, y, shape) = assemble(&[&a, &b], 1);
        assert_eq!(shape, SeqShape::new(2, 2));
        assert_eq!(x.as_slice(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(y, vec![0.0, 1.0, 1.0, 1.0]);
    }
}
