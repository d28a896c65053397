use serde::{Deserialize, Serialize};

use super::{Matrix, ParamStore, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    pub m: Vec<Matrix<T>>,
    pub v: Vec<Matrix<T>>,
    pub step: u64,
}

impl<T: Real> AdamState<T> {
    pub fn new(ps: &ParamStore<T>, config: AdamConfig) -> Self {
        let zeros = || ps.values().iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect();
        AdamState {
            config,
            m: zeros(),
            v: zeros(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update from the gradients currently in `ps`.
pub fn adam_step<T: Real>(ps: &mut ParamStore<T>, state: &mut AdamState<T>) {
    assert_eq!(state.m.len(), ps.len(), "optimizer state does not match parameters");
    state.step += 1;
    let c = state.config;
    let t = state.step as i32;
    let b1 = T::of(c.beta1);
    let b2 = T::of(c.beta2);
    let one = T::one();
    let corr1 = T::of(1.0 - c.beta1.powi(t));
    let corr2 = T::of(1.0 - c.beta2.powi(t));
    let lr = T::of(c.lr);
    let eps = T::of(c.eps);
    for id in ps.ids().collect::<Vec<_>>() {
        let g = ps.grad(id).as_slice().to_vec();
        let m = state.m[id.0].as_mut_slice();
        let v = state.v[id.0].as_mut_slice();
        let w = ps.value_mut(id).as_mut_slice();
        for k in 0..w.len() {
            m[k] = b1 * m[k] + (one - b1) * g[k];
            v[k] = b2 * v[k] + (one - b2) * g[k] * g[k];
            let mh = m[k] / corr1;
            let vh = v[k] / corr2;
            w[k] -= lr * mh / (vh.sqrt() + eps);
        }
    }
}
