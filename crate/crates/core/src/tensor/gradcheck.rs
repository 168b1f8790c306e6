//! Central-difference gradient checking.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Grads, ParamStore};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gradients smaller than this are compared in absolute terms.
pub const REL_ERR_FLOOR: f64 = 1e-3;

/// `|a - b| / max(|a|, |b|, REL_ERR_FLOOR)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_ERR_FLOOR)
}

#[derive(Clone, Copy, Debug)]
pub struct GradCheckConfig {
    pub eps: f64,
    /// Check every coordinate when `None`; otherwise a seeded sample per parameter
    /// (the coordinate with the largest analytic gradient is always included).
    pub max_coords_per_param: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_coords_per_param: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err < tol
    }
}

/// Compares `analytic` against central differences of `loss_fn` around `store`.
pub fn finite_diff_check<T, F>(
    store: &ParamStore<T>,
    analytic: &Grads<T>,
    cfg: &GradCheckConfig,
    mut loss_fn: F,
) -> Result<GradCheckReport>
where
    T: Scalar,
    F: FnMut(&ParamStore<T>) -> Result<T>,
{
    if !(cfg.eps > 0.0) {
        return Err(Error::Config(format!("finite difference step must be positive, got {}", cfg.eps)));
    }
    if analytic.len() != store.len() {
        return Err(Error::dim("finite_diff_check", store.len(), analytic.len()));
    }
    let mut work = store.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        worst_analytic: 0.0,
        worst_numeric: 0.0,
        checked: 0,
    };
    let eps = T::lit(cfg.eps);
    let ids: Vec<_> = store.iter().map(|(id, name, _)| (id, name.to_string())).collect();
    for (id, name) in ids {
        let g = analytic.get(id);
        let n = g.len();
        let coords: Vec<usize> = match cfg.max_coords_per_param {
            Some(limit) if n > limit && limit > 0 => {
                let largest = (0..n)
                    .max_by(|&a, &b| g.as_slice()[a].abs().partial_cmp(&g.as_slice()[b].abs()).unwrap())
                    .unwrap_or(0);
                let mut c: Vec<usize> = sample(&mut rng, n, limit - 1).into_iter().collect();
                if !c.contains(&largest) {
                    c.push(largest);
                }
                c.sort_unstable();
                c
            }
            _ => (0..n).collect(),
        };
        for c in coords {
            let orig = work.get(id).as_slice()[c];
            work.get_mut(id).as_mut_slice()[c] = orig + eps;
            let plus = loss_fn(&work)?;
            work.get_mut(id).as_mut_slice()[c] = orig - eps;
            let minus = loss_fn(&work)?;
            work.get_mut(id).as_mut_slice()[c] = orig;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::Numeric(format!("non-finite loss while perturbing `{name}`[{c}]")));
            }
            let numeric = ((plus - minus) / (eps + eps)).to_f64_lossy();
            let a = g.as_slice()[c].to_f64_lossy();
            let err = relative_error(a, numeric);
            report.checked += 1;
            if err > report.max_rel_err || report.worst_param.is_empty() {
                report.max_rel_err = err.max(report.max_rel_err);
                report.worst_param = name.clone();
                report.worst_index = c;
                report.worst_analytic = a;
                report.worst_numeric = numeric;
            }
        }
    }
    Ok(report)
}
