use super::{Grads, Matrix, ParamStore};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Clone, Debug)]
pub struct AdamWState<T> {
    step: u64,
    m: Vec<Matrix<T>>,
    v: Vec<Matrix<T>>,
}

impl<T: Scalar> AdamWState<T> {
    pub fn new(store: &ParamStore<T>) -> Self {
        let zeros = |s: &ParamStore<T>| s.iter().map(|(_, _, m)| Matrix::zeros(m.rows(), m.cols())).collect();
        Self {
            step: 0,
            m: zeros(store),
            v: zeros(store),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One decoupled-weight-decay Adam update.
///
/// Every gradient is checked before anything is modified, so a non-finite
/// gradient leaves parameters and state untouched.
pub fn adamw_step<T: Scalar>(
    store: &mut ParamStore<T>,
    grads: &Grads<T>,
    cfg: &AdamWConfig,
    state: &mut AdamWState<T>,
) -> Result<()> {
    if grads.len() != store.len() || state.m.len() != store.len() {
        return Err(Error::dim("adamw_step", store.len(), grads.len()));
    }
    for (id, g) in grads.iter() {
        if g.shape() != store.get(id).shape() {
            return Err(Error::dim(
                format!("adamw gradient `{}`", store.name(id)),
                format!("{:?}", store.get(id).shape()),
                format!("{:?}", g.shape()),
            ));
        }
        if !g.is_finite() {
            return Err(Error::Numeric(format!("non-finite gradient for `{}`", store.name(id))));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let lr = T::lit(cfg.lr);
    let b1 = T::lit(cfg.beta1);
    let b2 = T::lit(cfg.beta2);
    let eps = T::lit(cfg.eps);
    let decay = T::one() - lr * T::lit(cfg.weight_decay);
    let bc1 = T::one() - b1.powi(t);
    let bc2 = T::one() - b2.powi(t);
    for (id, g) in grads.iter() {
        let p = store.get_mut(id).as_mut_slice();
        let m = state.m[id.0].as_mut_slice();
        let v = state.v[id.0].as_mut_slice();
        for (((p, m), v), &g) in p.iter_mut().zip(m).zip(v).zip(g.as_slice()) {
            *m = b1 * *m + (T::one() - b1) * g;
            *v = b2 * *v + (T::one() - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p = *p * decay - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
