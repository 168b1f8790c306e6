//! Layers and losses built from tape primitives.

use super::tape::huber_elem;
use super::{Matrix, ParamStore, Tape, Var};
use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Scalar};

/// Dense layer `x W + b` with parameters `{name}.w` (in x out) and `{name}.b` (1 x out).
pub fn dense<T: Scalar>(tape: &mut Tape<T>, store: &ParamStore<T>, name: &str, x: Var) -> Result<Var> {
    let w_id = store.id(&format!("{name}.w"))?;
    let b_id = store.id(&format!("{name}.b"))?;
    let (in_dim, out_dim) = store.get(w_id).shape();
    let cols = tape.shape(x).1;
    if cols != in_dim {
        return Err(Error::dim(format!("layer `{name}` input"), in_dim, cols));
    }
    if store.get(b_id).shape() != (1, out_dim) {
        return Err(Error::dim(
            format!("layer `{name}` bias"),
            format!("1x{out_dim}"),
            format!("{:?}", store.get(b_id).shape()),
        ));
    }
    let w = tape.param(store, w_id);
    let b = tape.param(store, b_id);
    let xw = tape.matmul(x, w)?;
    tape.add_row(xw, b)
}

/// Stack of dense layers, ReLU between them and a linear output. `x` may hold a batch of rows.
pub fn mlp_forward<T: Scalar>(
    tape: &mut Tape<T>,
    store: &ParamStore<T>,
    layers: &[&str],
    x: Var,
) -> Result<Var> {
    let mut h = x;
    for (i, name) in layers.iter().enumerate() {
        h = dense(tape, store, name, h)?;
        if i + 1 < layers.len() {
            h = tape.relu(h);
        }
    }
    Ok(h)
}

/// Registers an MLP `dims[0] -> dims[1] -> ... -> dims[n]` under `{prefix}.l{i}`.
pub fn insert_mlp<T: Scalar, R: rand::Rng>(
    store: &mut ParamStore<T>,
    rng: &mut R,
    prefix: &str,
    dims: &[usize],
) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for (i, w) in dims.windows(2).enumerate() {
        let name = format!("{prefix}.l{i}");
        store.insert_dense(rng, &name, w[0], w[1])?;
        names.push(name);
    }
    Ok(names)
}

/// `-log softmax(logits)[label]` with log-sum-exp stabilization.
pub fn softmax_cross_entropy<T: Scalar>(logits: &[T], label: usize) -> Result<T> {
    if label >= logits.len() {
        return Err(Error::Index {
            index: label,
            len: logits.len(),
        });
    }
    Ok(log_sum_exp(logits) - logits[label])
}

/// Sum of coordinate-wise Huber losses.
pub fn huber<T: Scalar>(pred: &[T], target: &[T], delta: T) -> Result<T> {
    if pred.len() != target.len() {
        return Err(Error::dim("huber", pred.len(), target.len()));
    }
    Ok(pred.iter().zip(target).map(|(&p, &t)| huber_elem(p - t, delta)).sum())
}

/// Convenience: a `1 x n` constant on the tape.
pub fn constant_row<T: Scalar>(tape: &mut Tape<T>, data: Vec<T>) -> Var {
    tape.constant(Matrix::row_vector(data))
}
