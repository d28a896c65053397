use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::{Matrix, Real};

/// Handle to a tensor inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

/// Named parameter tensors with one gradient buffer per tensor.
#[derive(Debug, Clone, Default)]
pub struct ParamStore<T> {
    /// Seed the tensors were initialized from.
    pub rng_seed: u64,
    names: Vec<String>,
    values: Vec<Matrix<T>>,
    grads: Vec<Matrix<T>>,
}

impl<T: Real> ParamStore<T> {
    pub fn new() -> Self {
        ParamStore {
            rng_seed: 0,
            names: Vec::new(),
            values: Vec::new(),
            grads: Vec::new(),
        }
    }

    /// Registers a tensor. Panics if the name is already taken.
    pub fn add(&mut self, name: impl Into<String>, value: Matrix<T>) -> ParamId {
        let name = name.into();
        assert!(!self.names.contains(&name), "duplicate parameter {name}");
        self.names.push(name);
        self.grads.push(Matrix::zeros(value.rows(), value.cols()));
        self.values.push(value);
        ParamId(self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn value(&self, id: ParamId) -> &Matrix<T> {
        &self.values[id.0]
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Matrix<T> {
        &mut self.values[id.0]
    }

    pub fn grad(&self, id: ParamId) -> &Matrix<T> {
        &self.grads[id.0]
    }

    pub fn grad_mut(&mut self, id: ParamId) -> &mut Matrix<T> {
        &mut self.grads[id.0]
    }

    /// Values and gradients borrowed at the same time.
    pub fn split(&mut self) -> (&[Matrix<T>], &mut [Matrix<T>]) {
        (&self.values, &mut self.grads)
    }

    pub fn values(&self) -> &[Matrix<T>] {
        &self.values
    }

    pub fn zero_grads(&mut self) {
        for g in &mut self.grads {
            g.fill(T::zero());
        }
    }

    /// Scalar parameter count.
    pub fn num_scalars(&self) -> usize {
        self.values.iter().map(Matrix::len).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|m| m.as_slice().iter().all(|x| x.is_finite()))
    }

    /// Copies every value (not gradient) from `other`, which must have the same layout.
    pub fn copy_values_from(&mut self, other: &ParamStore<T>) {
        assert_eq!(self.len(), other.len(), "parameter count");
        for (dst, src) in self.values.iter_mut().zip(&other.values) {
            assert_eq!(dst.shape(), src.shape(), "parameter shape");
            dst.as_mut_slice().copy_from_slice(src.as_slice());
        }
    }

    pub fn cast<U: Real>(&self) -> ParamStore<U> {
        ParamStore {
            rng_seed: self.rng_seed,
            names: self.names.clone(),
            values: self.values.iter().map(Matrix::cast).collect(),
            grads: self.grads.iter().map(Matrix::cast).collect(),
        }
    }
}

/// Uniform(-limit, limit) entries.
pub fn uniform<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, limit: f64, rng: &mut R) -> Matrix<T> {
    let mut m = Matrix::zeros(rows, cols);
    if limit > 0.0 {
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
        for x in m.as_mut_slice() {
            *x = T::of(dist.sample(rng));
        }
    }
    m
}

/// LeCun-style fan-in scaling: Uniform(±sqrt(3 / fan_in)).
pub fn fan_in_uniform<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix<T> {
    uniform(rows, cols, (3.0 / rows.max(1) as f64).sqrt(), rng)
}

/// Glorot uniform: Uniform(±sqrt(6 / (fan_in + fan_out))).
pub fn glorot_uniform<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix<T> {
    uniform(rows, cols, (6.0 / (rows + cols).max(1) as f64).sqrt(), rng)
}

/// `rows x cols` matrix with orthonormal rows or columns (whichever is fewer),
/// made by Gram-Schmidt on Gaussian vectors.
pub fn orthogonal<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix<T> {
    let (n, len) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v: Vec<f64> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    let mut m = Matrix::zeros(rows, cols);
    for (i, b) in basis.iter().enumerate() {
        for (j, &x) in b.iter().enumerate() {
            if rows <= cols {
                m[(i, j)] = T::of(x);
            } else {
                m[(j, i)] = T::of(x);
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn orthogonal_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q: Matrix<f64> = orthogonal(16, 16, &mut rng);
        let qtq = {
            let mut out = Matrix::zeros(16, 16);
            super::super::gemm(1.0, q.t(), q.view(), 0.0, &mut out);
            out
        };
        assert!(qtq.max_abs_diff(&Matrix::identity(16)) < 1e-10);
    }

    #[test]
    fn orthogonal_wide() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q: Matrix<f64> = orthogonal(3, 10, &mut rng);
        let mut qqt = Matrix::zeros(3, 3);
        super::super::gemm(1.0, q.view(), q.t(), 0.0, &mut qqt);
        assert!(qqt.max_abs_diff(&Matrix::identity(3)) < 1e-10);
    }

    #[test]
    fn store_bookkeeping() {
        let mut ps: ParamStore<f32> = ParamStore::new();
        let a = ps.add("a", Matrix::filled(2, 3, 1.0));
        let b = ps.add("b", Matrix::zeros(1, 4));
        assert_eq!(ps.num_scalars(), 10);
        assert_eq!(ps.find("b"), Some(b));
        assert_eq!(ps.name(a), "a");
        ps.grad_mut(a).fill(2.0);
        ps.zero_grads();
        assert!(ps.grad(a).as_slice().iter().all(|&g| g == 0.0));
    }

    #[test]
    #[should_panic(expected = "duplicate parameter")]
    fn duplicate_name_panics() {
        let mut ps: ParamStore<f32> = ParamStore::new();
        ps.add("w", Matrix::zeros(1, 1));
        ps.add("w", Matrix::zeros(1, 1));
    }

    #[test]
    fn fan_in_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w: Matrix<f64> = fan_in_uniform(12, 50, &mut rng);
        let lim = (3.0f64 / 12.0).sqrt();
        assert!(w.as_slice().iter().all(|x| x.abs() <= lim));
    }
}
