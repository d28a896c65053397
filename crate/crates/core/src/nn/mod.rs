//! Small hand-written neural network kernel.
//!
//! Layers are plain forward/backward function pairs over row-major
//! matrices; there is no autodiff graph. Sequence batches are stored
//! time-major: row `t * batch + b` holds step `t` of sequence `b`, so every
//! step of a recurrence is one contiguous block of rows.

mod adam;
mod conv;
mod dense;
mod dropout;
mod gradcheck;
mod loss;
mod lstm;
mod matrix;
mod params;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, NumAssign};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use conv::{im2col3, residual_conv_backward, residual_conv_forward, ConvCache, ResidualConv};
pub use dense::{dense_backward, dense_forward, Activation, Dense, DenseCache, DenseGrads};
pub use dropout::{dropout_mask, Dropout};
pub use gradcheck::{grad_check, relative_error, GradCheckConfig, GradCheckReport};
pub use loss::{bce_loss, bce_with_logits, sigmoid, BCE_CLAMP};
pub use lstm::{
    lstm_cell, lstm_cell_backward, BiLstm, BiLstmCache, CellCache, CellGrads, LstmDirection, LstmParams,
};
pub use matrix::{gemm, MatRef, Matrix};
pub use params::{fan_in_uniform, glorot_uniform, orthogonal, uniform, ParamId, ParamStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DType {
    F32,
    F64,
}

impl DType {
    pub fn name(&self) -> &'static str {
        match self {
            DType::F32 => "f32",
            DType::F64 => "f64",
        }
    }
}

/// Floating point element type of a network: `f32` for training, `f64` for verification.
pub trait Real:
    Float + NumAssign + Default + Debug + Display + Send + Sync + Sum + 'static
{
    const DTYPE: DType;

    fn of(x: f64) -> Self;

    fn as_f64(self) -> f64;

    /// `C = alpha * A * B + beta * C` on strided storage.
    ///
    /// # Safety
    /// All pointers and strides must address valid elements for the given shapes.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );

    fn write_le(values: &[Self], out: &mut Vec<u8>);

    fn read_le(bytes: &[u8]) -> Vec<Self>;
}

impl Real for f32 {
    const DTYPE: DType = DType::F32;

    fn of(x: f64) -> Self {
        x as f32
    }

    fn as_f64(self) -> f64 {
        f64::from(self)
    }

    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
    }

    fn write_le(values: &[Self], out: &mut Vec<u8>) {
        out.reserve(values.len() * 4);
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn read_le(bytes: &[u8]) -> Vec<Self> {
        bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
            .collect()
    }
}

impl Real for f64 {
    const DTYPE: DType = DType::F64;

    fn of(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }

    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
    }

    fn write_le(values: &[Self], out: &mut Vec<u8>) {
        out.reserve(values.len() * 8);
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn read_le(bytes: &[u8]) -> Vec<Self> {
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NnError {
    #[error("shape mismatch in {op}: expected {expected}, got {found}")]
    Shape {
        op: &'static str,
        expected: String,
        found: String,
    },
}

pub(crate) fn shape_err(op: &'static str, expected: impl Display, found: impl Display) -> NnError {
    NnError::Shape {
        op,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// Layout of a time-major sequence batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeqShape {
    pub steps: usize,
    pub batch: usize,
}

impl SeqShape {
    pub fn new(steps: usize, batch: usize) -> Self {
        SeqShape { steps, batch }
    }

    /// A single sequence.
    pub fn single(steps: usize) -> Self {
        SeqShape { steps, batch: 1 }
    }

    pub fn rows(&self) -> usize {
        self.steps * self.batch
    }
}
