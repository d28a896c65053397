use rand::Rng;

use super::params::fan_in_uniform;
use super::{gemm, shape_err, Matrix, NnError, ParamId, ParamStore, Real, SeqShape};

/// Width-3 patches with zero padding at both ends of every sequence:
/// row `(t, b)` of the result is `[x(t-1, b), x(t, b), x(t+1, b)]`.
pub fn im2col3<T: Real>(x: &Matrix<T>, shape: SeqShape) -> Matrix<T> {
    let c = x.cols();
    let bsz = shape.batch;
    let mut col = Matrix::zeros(shape.rows(), 3 * c);
    for t in 0..shape.steps {
        for b in 0..bsz {
            let r = t * bsz + b;
            let row = col.row_mut(r);
            if t > 0 {
                row[..c].copy_from_slice(x.row(r - bsz));
            }
            row[c..2 * c].copy_from_slice(x.row(r));
            if t + 1 < shape.steps {
                row[2 * c..].copy_from_slice(x.row(r + bsz));
            }
        }
    }
    col
}

/// Adds each patch gradient back onto the rows it was copied from.
fn col2im3<T: Real>(dcol: &Matrix<T>, shape: SeqShape, dx: &mut Matrix<T>) {
    let c = dx.cols();
    let bsz = shape.batch;
    for t in 0..shape.steps {
        for b in 0..bsz {
            let r = t * bsz + b;
            let g = dcol.row(r);
            if t > 0 {
                dx.row_mut(r - bsz).iter_mut().zip(&g[..c]).for_each(|(d, &v)| *d += v);
            }
            dx.row_mut(r).iter_mut().zip(&g[c..2 * c]).for_each(|(d, &v)| *d += v);
            if t + 1 < shape.steps {
                dx.row_mut(r + bsz).iter_mut().zip(&g[2 * c..]).for_each(|(d, &v)| *d += v);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvCache<T> {
    col: Matrix<T>,
    act: Matrix<T>,
    shape: SeqShape,
}

/// `y = x + relu(conv3(x) + b)` with `w: 3c x c` acting on [`im2col3`] patches.
pub fn residual_conv_forward<T: Real>(
    x: &Matrix<T>,
    shape: SeqShape,
    w: &Matrix<T>,
    b: &Matrix<T>,
) -> Result<(Matrix<T>, ConvCache<T>), NnError> {
    let c = x.cols();
    if w.shape() != (3 * c, c) {
        return Err(shape_err("residual_conv", format!("weights {}x{c}", 3 * c), format!("{}x{}", w.rows(), w.cols())));
    }
    if b.shape() != (1, c) {
        return Err(shape_err("residual_conv", format!("bias 1x{c}"), format!("{}x{}", b.rows(), b.cols())));
    }
    if x.rows() != shape.rows() {
        return Err(shape_err("residual_conv", format!("{} rows", shape.rows()), x.rows()));
    }
    let col = im2col3(x, shape);
    let mut act = Matrix::zeros(x.rows(), c);
    gemm(T::one(), col.view(), w.view(), T::zero(), &mut act);
    act.add_row(b.as_slice());
    act.as_mut_slice().iter_mut().for_each(|v| *v = v.max(T::zero()));
    let mut y = x.clone();
    y.add_assign(&act);
    Ok((y, ConvCache { col, act, shape }))
}

/// Returns `(dx, dw, db)`.
pub fn residual_conv_backward<T: Real>(
    cache: &ConvCache<T>,
    w: &Matrix<T>,
    dy: &Matrix<T>,
) -> (Matrix<T>, Matrix<T>, Matrix<T>) {
    let mut dw = Matrix::zeros(w.rows(), w.cols());
    let mut db = Matrix::zeros(1, w.cols());
    let mut dpre = dy.clone();
    for (d, &a) in dpre.as_mut_slice().iter_mut().zip(cache.act.as_slice()) {
        if a <= T::zero() {
            *d = T::zero();
        }
    }
    gemm(T::one(), cache.col.t(), dpre.view(), T::zero(), &mut dw);
    dpre.sum_rows_into(db.as_mut_slice());
    let mut dcol = Matrix::zeros(cache.col.rows(), cache.col.cols());
    gemm(T::one(), dpre.view(), w.t(), T::zero(), &mut dcol);
    let mut dx = dy.clone();
    col2im3(&dcol, cache.shape, &mut dx);
    (dx, dw, db)
}

/// Residual width-3 convolution block with parameters in a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResidualConv {
    pub w: ParamId,
    pub b: ParamId,
    pub channels: usize,
}

impl ResidualConv {
    pub fn new<T: Real, R: Rng + ?Sized>(ps: &mut ParamStore<T>, name: &str, channels: usize, rng: &mut R) -> Self {
        let w = ps.add(format!("{name}.w"), fan_in_uniform(3 * channels, channels, rng));
        let b = ps.add(format!("{name}.b"), Matrix::zeros(1, channels));
        ResidualConv { w, b, channels }
    }

    pub fn forward<T: Real>(
        &self,
        ps: &ParamStore<T>,
        x: &Matrix<T>,
        shape: SeqShape,
    ) -> Result<(Matrix<T>, ConvCache<T>), NnError> {
        residual_conv_forward(x, shape, ps.value(self.w), ps.value(self.b))
    }

    pub fn backward<T: Real>(&self, ps: &mut ParamStore<T>, cache: &ConvCache<T>, dy: &Matrix<T>) -> Matrix<T> {
        let (dx, dw, db) = residual_conv_backward(cache, ps.value(self.w), dy);
        ps.grad_mut(self.w).add_assign(&dw);
        ps.grad_mut(self.b).add_assign(&db);
        dx
    }
}
