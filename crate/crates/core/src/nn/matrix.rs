use std::ops::{Index, IndexMut};

use super::{shape_err, NnError, Real};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, NnError> {
        if data.len() != rows * cols {
            return Err(shape_err(
                "from_vec",
                format!("{} elements", rows * cols),
                data.len(),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds from `f64` values, converting to `T`.
    pub fn from_f64(rows: usize, cols: usize, data: &[f64]) -> Result<Self, NnError> {
        Self::from_vec(rows, cols, data.iter().map(|&x| T::of(x)).collect())
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Rows `start..end` as a contiguous slice.
    pub fn rows_slice(&self, start: usize, end: usize) -> &[T] {
        &self.data[start * self.cols..end * self.cols]
    }

    pub fn rows_slice_mut(&mut self, start: usize, end: usize) -> &mut [T] {
        &mut self.data[start * self.cols..end * self.cols]
    }

    pub fn view(&self) -> MatRef<'_, T> {
        MatRef::new(&self.data, self.rows, self.cols)
    }

    /// View of rows `start..end`.
    pub fn view_rows(&self, start: usize, end: usize) -> MatRef<'_, T> {
        MatRef::new(self.rows_slice(start, end), end - start, self.cols)
    }

    pub fn t(&self) -> MatRef<'_, T> {
        self.view().t()
    }

    pub fn fill(&mut self, value: T) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| U::of(x.as_f64())).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Matrix<T>) {
        assert_eq!(self.shape(), other.shape(), "add_assign shape");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn mul_assign_elem(&mut self, other: &Matrix<T>) {
        assert_eq!(self.shape(), other.shape(), "mul_assign_elem shape");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a *= b;
        }
    }

    /// Adds the 1 x cols row vector `bias` to every row.
    pub fn add_row(&mut self, bias: &[T]) {
        assert_eq!(bias.len(), self.cols, "add_row width");
        if self.cols == 0 {
            return;
        }
        for row in self.data.chunks_exact_mut(self.cols) {
            for (a, &b) in row.iter_mut().zip(bias) {
                *a += b;
            }
        }
    }

    /// Column sums accumulated into `out`.
    pub fn sum_rows_into(&self, out: &mut [T]) {
        assert_eq!(out.len(), self.cols, "sum_rows_into width");
        if self.cols == 0 {
            return;
        }
        for row in self.data.chunks_exact(self.cols) {
            for (o, &x) in out.iter_mut().zip(row) {
                *o += x;
            }
        }
    }

    /// Columns `start..end` copied into a new matrix.
    pub fn cols_range(&self, start: usize, end: usize) -> Matrix<T> {
        let w = end - start;
        let mut out = Matrix::zeros(self.rows, w);
        for r in 0..self.rows {
            out.row_mut(r).copy_from_slice(&self.row(r)[start..end]);
        }
        out
    }

    /// Horizontal concatenation.
    pub fn hcat(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
        assert_eq!(a.rows, b.rows, "hcat rows");
        let mut out = Matrix::zeros(a.rows, a.cols + b.cols);
        for r in 0..a.rows {
            let row = out.row_mut(r);
            row[..a.cols].copy_from_slice(a.row(r));
            row[a.cols..].copy_from_slice(b.row(r));
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Matrix<T>) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs().as_f64())
            .fold(0.0, f64::max)
    }

    /// `self * other` as a new matrix.
    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(self.rows, other.cols);
        gemm(T::one(), self.view(), other.view(), T::zero(), &mut out);
        out
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Borrowed strided matrix view; transposing swaps strides without copying.
#[derive(Debug, Clone, Copy)]
pub struct MatRef<'a, T> {
    data: &'a [T],
    rows: usize,
    cols: usize,
    rs: usize,
    cs: usize,
}

impl<'a, T> MatRef<'a, T> {
    /// Row-major view of `data`.
    pub fn new(data: &'a [T], rows: usize, cols: usize) -> Self {
        assert_eq!(data.len(), rows * cols, "view length");
        MatRef {
            data,
            rows,
            cols,
            rs: cols,
            cs: 1,
        }
    }

    pub fn t(self) -> Self {
        MatRef {
            data: self.data,
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// `c = alpha * a * b + beta * c`.
///
/// Panics when shapes do not line up.
pub fn gemm<T: Real>(alpha: T, a: MatRef<'_, T>, b: MatRef<'_, T>, beta: T, c: &mut Matrix<T>) {
    assert_eq!(a.cols, b.rows, "gemm inner dimension");
    assert_eq!((a.rows, b.cols), c.shape(), "gemm output shape");
    let (m, k, n) = (a.rows, a.cols, b.cols);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        if beta == T::zero() {
            c.fill(T::zero());
        } else {
            c.data.iter_mut().for_each(|x| *x *= beta);
        }
        return;
    }
    // SAFETY: the views were checked at construction (len == rows * cols with
    // row-major strides, possibly swapped by `t`), so every (i, j) with
    // i < rows, j < cols addresses i * rs + j * cs < len. `c` is row-major
    // with shape m x n and does not alias the shared borrows of `a` and `b`.
    unsafe {
        T::gemm_raw(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr(),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.data.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Matrix<f64>, b: &Matrix<f64>) -> Matrix<f64> {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut s = 0.0;
                for k in 0..a.cols() {
                    s += a[(i, k)] * b[(k, j)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    fn transpose(a: &Matrix<f64>) -> Matrix<f64> {
        let mut out = Matrix::zeros(a.cols(), a.rows());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                out[(j, i)] = a[(i, j)];
            }
        }
        out
    }

    fn seq(rows: usize, cols: usize, k: f64) -> Matrix<f64> {
        let data: Vec<f64> = (0..rows * cols).map(|i| ((i as f64) * k).sin()).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn gemm_matches_naive() {
        let a = seq(5, 7, 0.3);
        let b = seq(7, 4, 0.7);
        assert!(a.matmul(&b).max_abs_diff(&naive(&a, &b)) < 1e-12);
    }

    #[test]
    fn gemm_transposed_views() {
        let a = seq(7, 5, 0.3);
        let b = seq(4, 7, 0.7);
        let mut out = Matrix::zeros(5, 4);
        gemm(1.0, a.t(), b.t(), 0.0, &mut out);
        let expect = naive(&transpose(&a), &transpose(&b));
        assert!(out.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn gemm_accumulates() {
        let a = seq(3, 2, 0.5);
        let b = seq(2, 3, 0.9);
        let mut out = Matrix::filled(3, 3, 1.0);
        gemm(2.0, a.view(), b.view(), 1.0, &mut out);
        let expect = naive(&a, &b).map(|x| 2.0 * x + 1.0);
        assert!(out.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn empty_inner_dimension() {
        let a: Matrix<f32> = Matrix::zeros(2, 0);
        let b: Matrix<f32> = Matrix::zeros(0, 3);
        let mut out = Matrix::filled(2, 3, 5.0f32);
        gemm(1.0, a.view(), b.view(), 0.0, &mut out);
        assert!(out.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn identity_product() {
        let a = seq(4, 4, 0.2);
        assert!(a.matmul(&Matrix::identity(4)).max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn hcat_and_cols_range() {
        let a = seq(3, 2, 0.1);
        let b = seq(3, 4, 0.2);
        let c = Matrix::hcat(&a, &b);
        assert_eq!(c.cols_range(0, 2), a);
        assert_eq!(c.cols_range(2, 6), b);
    }
}
