use rand::{Rng, RngCore};

use super::{Matrix, Real};

/// Inverted dropout mask: each entry is 0 with probability `rate`, else `1 / (1 - rate)`.
pub fn dropout_mask<T: Real>(rows: usize, cols: usize, rate: f64, rng: &mut dyn RngCore) -> Matrix<T> {
    assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0, 1)");
    let keep = T::of(1.0 / (1.0 - rate));
    let mut m = Matrix::zeros(rows, cols);
    for x in m.as_mut_slice() {
        if rng.random::<f64>() >= rate {
            *x = keep;
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dropout {
    pub rate: f64,
}

impl Dropout {
    pub fn new(rate: f64) -> Self {
        assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0, 1)");
        Dropout { rate }
    }

    /// Training pass; returns the mask for [`Dropout::backward`] (`None` when inactive).
    pub fn forward_train<T: Real>(&self, x: &mut Matrix<T>, rng: Option<&mut dyn RngCore>) -> Option<Matrix<T>> {
        match rng {
            Some(rng) if self.rate > 0.0 => {
                let m = dropout_mask(x.rows(), x.cols(), self.rate, rng);
                x.mul_assign_elem(&m);
                Some(m)
            }
            _ => None,
        }
    }

    pub fn backward<T: Real>(&self, mask: Option<&Matrix<T>>, dy: &mut Matrix<T>) {
        if let Some(m) = mask {
            dy.mul_assign_elem(m);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn drop_fraction_and_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rate = 0.4;
        let n = 100_000usize;
        let m: Matrix<f64> = dropout_mask(1, n, rate, &mut rng);
        let zeros = m.as_slice().iter().filter(|&&x| x == 0.0).count() as f64;
        let sigma = (rate * (1.0 - rate) / n as f64).sqrt();
        assert!((zeros / n as f64 - rate).abs() < 3.0 * sigma);
        assert!(m
            .as_slice()
            .iter()
            .all(|&x| x == 0.0 || (x - 1.0 / (1.0 - rate)).abs() < 1e-12));
    }

    #[test]
    fn inactive_without_rng() {
        let mut x = Matrix::<f32>::filled(2, 2, 3.0);
        assert!(Dropout::new(0.5).forward_train(&mut x, None).is_none());
        assert_eq!(x, Matrix::filled(2, 2, 3.0));
    }
}
