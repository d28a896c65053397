use super::{shape_err, NnError, Real};

/// Probabilities are clamped to `[BCE_CLAMP, 1 - BCE_CLAMP]` before taking logs.
pub const BCE_CLAMP: f64 = 1e-7;

pub fn sigmoid<T: Real>(x: T) -> T {
    // split by sign so exp never overflows
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// Mean binary cross-entropy of probabilities `p` against 0/1 targets `y`.
pub fn bce_loss<T: Real>(p: &[T], y: &[T]) -> Result<T, NnError> {
    if p.len() != y.len() {
        return Err(shape_err("bce_loss", format!("{} targets", p.len()), y.len()));
    }
    if p.is_empty() {
        return Ok(T::zero());
    }
    let lo = T::of(BCE_CLAMP);
    let hi = T::one() - lo;
    let total: T = p
        .iter()
        .zip(y)
        .map(|(&p, &y)| {
            let p = p.max(lo).min(hi);
            -(y * p.ln() + (T::one() - y) * (T::one() - p).ln())
        })
        .sum();
    Ok(total / T::of(p.len() as f64))
}

/// Mean binary cross-entropy of `sigmoid(z)` against `y`, with its gradient
/// with respect to the logits `z`.
pub fn bce_with_logits<T: Real>(z: &[T], y: &[T]) -> Result<(T, Vec<T>), NnError> {
    if z.len() != y.len() {
        return Err(shape_err("bce_with_logits", format!("{} targets", z.len()), y.len()));
    }
    if z.is_empty() {
        return Ok((T::zero(), Vec::new()));
    }
    let n = T::of(z.len() as f64);
    let mut total = T::zero();
    let mut grad = Vec::with_capacity(z.len());
    for (&z, &y) in z.iter().zip(y) {
        // max(z, 0) - z y + log(1 + exp(-|z|))
        total += z.max(T::zero()) - z * y + (-z.abs()).exp().ln_1p();
        grad.push((sigmoid(z) - y) / n);
    }
    Ok((total / n, grad))
}
