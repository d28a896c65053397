use rand::Rng;
use serde::{Deserialize, Serialize};

use super::params::fan_in_uniform;
use super::{gemm, shape_err, Matrix, NnError, ParamId, ParamStore, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
}

impl Activation {
    pub fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(T::zero()),
            Activation::Sigmoid => super::sigmoid(x),
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn derivative_at_output<T: Real>(self, y: T) -> T {
        match self {
            Activation::Identity => T::one(),
            Activation::Relu => {
                if y > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Sigmoid => y * (T::one() - y),
        }
    }
}

/// `act(x W + b)` with `x: n x in`, `W: in x out`, `b: 1 x out`.
pub fn dense_forward<T: Real>(
    x: &Matrix<T>,
    w: &Matrix<T>,
    b: &Matrix<T>,
    act: Activation,
) -> Result<Matrix<T>, NnError> {
    if x.cols() != w.rows() {
        return Err(shape_err("dense", format!("input width {}", w.rows()), x.cols()));
    }
    if b.shape() != (1, w.cols()) {
        return Err(shape_err("dense", format!("bias 1x{}", w.cols()), format!("{}x{}", b.rows(), b.cols())));
    }
    let mut out = Matrix::zeros(x.rows(), w.cols());
    gemm(T::one(), x.view(), w.view(), T::zero(), &mut out);
    out.add_row(b.as_slice());
    if act != Activation::Identity {
        out.as_mut_slice().iter_mut().for_each(|v| *v = act.apply(*v));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct DenseGrads<T> {
    pub dx: Matrix<T>,
    pub dw: Matrix<T>,
    pub db: Matrix<T>,
}

/// Gradients of [`dense_forward`] given its input, output and upstream gradient.
pub fn dense_backward<T: Real>(
    x: &Matrix<T>,
    w: &Matrix<T>,
    out: &Matrix<T>,
    act: Activation,
    dy: &Matrix<T>,
) -> DenseGrads<T> {
    let dz = pre_activation_grad(out, act, dy);
    let mut dx = Matrix::zeros(x.rows(), x.cols());
    gemm(T::one(), dz.view(), w.t(), T::zero(), &mut dx);
    let mut dw = Matrix::zeros(w.rows(), w.cols());
    gemm(T::one(), x.t(), dz.view(), T::zero(), &mut dw);
    let mut db = Matrix::zeros(1, w.cols());
    dz.sum_rows_into(db.as_mut_slice());
    DenseGrads { dx, dw, db }
}

fn pre_activation_grad<T: Real>(out: &Matrix<T>, act: Activation, dy: &Matrix<T>) -> Matrix<T> {
    assert_eq!(out.shape(), dy.shape(), "dense upstream gradient shape");
    if act == Activation::Identity {
        return dy.clone();
    }
    let mut dz = dy.clone();
    for (d, &y) in dz.as_mut_slice().iter_mut().zip(out.as_slice()) {
        *d *= act.derivative_at_output(y);
    }
    dz
}

/// Fully connected layer whose tensors live in a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dense {
    pub w: ParamId,
    pub b: ParamId,
    pub act: Activation,
    pub input: usize,
    pub output: usize,
}

#[derive(Debug, Clone)]
pub struct DenseCache<T> {
    x: Matrix<T>,
    out: Matrix<T>,
}

impl Dense {
    pub fn new<T: Real, R: Rng + ?Sized>(
        ps: &mut ParamStore<T>,
        name: &str,
        input: usize,
        output: usize,
        act: Activation,
        rng: &mut R,
    ) -> Self {
        let w = ps.add(format!("{name}.w"), fan_in_uniform(input, output, rng));
        let b = ps.add(format!("{name}.b"), Matrix::zeros(1, output));
        Dense {
            w,
            b,
            act,
            input,
            output,
        }
    }

    pub fn forward<T: Real>(&self, ps: &ParamStore<T>, x: &Matrix<T>) -> Result<Matrix<T>, NnError> {
        dense_forward(x, ps.value(self.w), ps.value(self.b), self.act)
    }

    /// Forward pass that keeps what [`Dense::backward`] needs.
    pub fn forward_train<T: Real>(
        &self,
        ps: &ParamStore<T>,
        x: Matrix<T>,
    ) -> Result<(Matrix<T>, DenseCache<T>), NnError> {
        let out = self.forward(ps, &x)?;
        Ok((out.clone(), DenseCache { x, out }))
    }

    /// Accumulates parameter gradients into `ps` and returns the input gradient.
    pub fn backward<T: Real>(&self, ps: &mut ParamStore<T>, cache: &DenseCache<T>, dy: &Matrix<T>) -> Matrix<T> {
        let (values, grads) = ps.split();
        let w = &values[self.w.0];
        let dz = pre_activation_grad(&cache.out, self.act, dy);
        gemm(T::one(), cache.x.t(), dz.view(), T::one(), &mut grads[self.w.0]);
        dz.sum_rows_into(grads[self.b.0].as_mut_slice());
        let mut dx = Matrix::zeros(cache.x.rows(), cache.x.cols());
        gemm(T::one(), dz.view(), w.t(), T::zero(), &mut dx);
        dx
    }
}
