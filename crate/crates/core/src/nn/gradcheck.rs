use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ParamStore;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    /// Central difference step.
    pub eps: f64,
    /// Coordinates checked per tensor (all of them when the tensor is smaller).
    pub samples_per_tensor: usize,
    /// Lower bound on the relative error denominator.
    pub floor: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            eps: 1e-5,
            samples_per_tensor: 100,
            floor: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// `(tensor name, max relative error, coordinates checked)`
    pub per_tensor: Vec<(String, f64, usize)>,
}

impl GradCheckReport {
    pub fn coordinates(&self) -> usize {
        self.per_tensor.iter().map(|t| t.2).sum()
    }
}

/// `|a - n| / max(|a|, |n|, floor)`, zero when both agree exactly.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares the gradients already stored in `ps` against central differences
/// of `loss`, which must compute the same scalar those gradients belong to.
pub fn grad_check<F>(ps: &mut ParamStore<f64>, mut loss: F, cfg: GradCheckConfig) -> GradCheckReport
where
    F: FnMut(&ParamStore<f64>) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut per_tensor = Vec::new();
    let mut max_rel_error: f64 = 0.0;
    for id in ps.ids().collect::<Vec<_>>() {
        let len = ps.value(id).len();
        let coords: Vec<usize> = if len <= cfg.samples_per_tensor {
            (0..len).collect()
        } else {
            sample(&mut rng, len, cfg.samples_per_tensor).into_vec()
        };
        let mut worst: f64 = 0.0;
        for &k in &coords {
            let orig = ps.value(id).as_slice()[k];
            ps.value_mut(id).as_mut_slice()[k] = orig + cfg.eps;
            let up = loss(ps);
            ps.value_mut(id).as_mut_slice()[k] = orig - cfg.eps;
            let down = loss(ps);
            ps.value_mut(id).as_mut_slice()[k] = orig;
            let numeric = (up - down) / (2.0 * cfg.eps);
            let analytic = ps.grad(id).as_slice()[k];
            worst = worst.max(relative_error(analytic, numeric, cfg.floor));
        }
        max_rel_error = max_rel_error.max(worst);
        per_tensor.push((ps.name(id).to_string(), worst, coords.len()));
    }
    GradCheckReport {
        max_rel_error,
        per_tensor,
    }
}
