//! Reverse-mode automatic differentiation over dense matrices.
//!
//! Every operation appends a node holding its forward value. [`Tape::backward`]
//! walks the nodes in reverse insertion order, which is a topological order
//! by construction. Nodes that do not depend on a parameter never receive an
//! adjoint, so constant branches and anything behind [`Tape::stop_gradient`]
//! are skipped.

use super::matrix::{matmul_at_acc, matmul_bt_acc};
use super::{Grads, Matrix, ParamId, ParamStore};
use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Scalar};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Clone, Debug)]
enum Op<T> {
    Constant,
    Param(ParamId),
    MatMul(Var, Var),
    AddRow(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, T),
    Relu(Var),
    ConcatCols(Var, Var),
    Reshape(Var),
    GatherRows(Var, Vec<usize>),
    StopGradient,
    SumAll(Var),
    SoftmaxCe {
        logits: Var,
        label: usize,
        probs: Vec<T>,
    },
    Huber {
        pred: Var,
        target: Vec<T>,
        weight: Vec<T>,
        delta: T,
    },
}

#[derive(Clone, Debug)]
struct Node<T> {
    value: Matrix<T>,
    op: Op<T>,
    needs_grad: bool,
}

/// Ordered record of primitive operations.
#[derive(Clone, Debug, Default)]
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Matrix<T> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    fn push(&mut self, value: Matrix<T>, op: Op<T>, needs_grad: bool) -> Var {
        self.nodes.push(Node { value, op, needs_grad });
        Var(self.nodes.len() - 1)
    }

    fn ng(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    pub fn constant(&mut self, value: Matrix<T>) -> Var {
        self.push(value, Op::Constant, false)
    }

    pub fn param(&mut self, store: &ParamStore<T>, id: ParamId) -> Var {
        self.push(store.get(id).clone(), Op::Param(id), true)
    }

    pub fn param_named(&mut self, store: &ParamStore<T>, name: &str) -> Result<Var> {
        Ok(self.param(store, store.id(name)?))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(value, Op::MatMul(a, b), ng))
    }

    /// `x (n x c) + bias (1 x c)` broadcast over rows.
    pub fn add_row(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (n, c) = self.shape(x);
        if self.shape(bias) != (1, c) {
            return Err(Error::dim("add_row", format!("1x{c}"), format!("{:?}", self.shape(bias))));
        }
        let mut value = self.value(x).clone();
        let b = self.value(bias).as_slice().to_vec();
        for r in 0..n {
            for (o, &bv) in value.row_mut(r).iter_mut().zip(&b) {
                *o = *o + bv;
            }
        }
        let ng = self.ng(x) || self.ng(bias);
        Ok(self.push(value, Op::AddRow(x, bias), ng))
    }

    fn same_shape(&self, ctx: &str, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::dim(ctx, format!("{:?}", self.shape(a)), format!("{:?}", self.shape(b))));
        }
        Ok(())
    }

    fn zip_with(&self, a: Var, b: Var, f: impl Fn(T, T) -> T) -> Matrix<T> {
        let va = self.value(a);
        let data = va
            .as_slice()
            .iter()
            .zip(self.value(b).as_slice())
            .map(|(&x, &y)| f(x, y))
            .collect();
        Matrix::from_vec(va.rows(), va.cols(), data).expect("same shape")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let value = self.zip_with(a, b, |x, y| x + y);
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(value, Op::Add(a, b), ng))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("sub", a, b)?;
        let value = self.zip_with(a, b, |x, y| x - y);
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(value, Op::Sub(a, b), ng))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        let value = self.zip_with(a, b, |x, y| x * y);
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(value, Op::Mul(a, b), ng))
    }

    pub fn scale(&mut self, a: Var, s: T) -> Var {
        let value = self.value(a).map(|x| x * s);
        let ng = self.ng(a);
        self.push(value, Op::Scale(a, s), ng)
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.scale(a, -T::one())
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| if x > T::zero() { x } else { T::zero() });
        let ng = self.ng(a);
        self.push(value, Op::Relu(a), ng)
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ra, ca) = self.shape(a);
        let (rb, cb) = self.shape(b);
        if ra != rb {
            return Err(Error::dim("concat_cols", ra, rb));
        }
        let mut data = Vec::with_capacity(ra * (ca + cb));
        for r in 0..ra {
            data.extend_from_slice(self.value(a).row(r));
            data.extend_from_slice(self.value(b).row(r));
        }
        let ng = self.ng(a) || self.ng(b);
        Ok(self.push(Matrix::from_vec(ra, ca + cb, data)?, Op::ConcatCols(a, b), ng))
    }

    pub fn reshape(&mut self, a: Var, rows: usize, cols: usize) -> Result<Var> {
        let value = self.value(a).clone().reshaped(rows, cols)?;
        let ng = self.ng(a);
        Ok(self.push(value, Op::Reshape(a), ng))
    }

    /// Builds a matrix whose row `r` is row `indices[r]` of `a`.
    pub fn gather_rows(&mut self, a: Var, indices: &[usize]) -> Result<Var> {
        let (ra, ca) = self.shape(a);
        let mut data = Vec::with_capacity(indices.len() * ca);
        for &i in indices {
            if i >= ra {
                return Err(Error::Index { index: i, len: ra });
            }
            data.extend_from_slice(self.value(a).row(i));
        }
        let ng = self.ng(a);
        Ok(self.push(
            Matrix::from_vec(indices.len(), ca, data)?,
            Op::GatherRows(a, indices.to_vec()),
            ng,
        ))
    }

    pub fn row(&mut self, a: Var, r: usize) -> Result<Var> {
        self.gather_rows(a, &[r])
    }

    /// Forward identity; contributes no gradient to its input.
    pub fn stop_gradient(&mut self, a: Var) -> Var {
        let value = self.value(a).clone();
        self.push(value, Op::StopGradient, false)
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let s: T = self.value(a).as_slice().iter().copied().sum();
        let ng = self.ng(a);
        self.push(Matrix::scalar(s), Op::SumAll(a), ng)
    }

    /// Sum of `1 x 1` values in slice order. An empty slice yields a zero constant.
    pub fn add_scalars(&mut self, xs: &[Var]) -> Result<Var> {
        let Some((&first, rest)) = xs.split_first() else {
            return Ok(self.constant(Matrix::scalar(T::zero())));
        };
        let mut acc = first;
        for &x in rest {
            acc = self.add(acc, x)?;
        }
        Ok(acc)
    }

    /// `-log softmax(logits)[label]` over all entries of `logits` (row-major).
    pub fn softmax_cross_entropy(&mut self, logits: Var, label: usize) -> Result<Var> {
        let v = self.value(logits).as_slice();
        if label >= v.len() {
            return Err(Error::Index { index: label, len: v.len() });
        }
        let z = log_sum_exp(v);
        let loss = z - v[label];
        let probs = v.iter().map(|&x| (x - z).exp()).collect();
        let ng = self.ng(logits);
        Ok(self.push(Matrix::scalar(loss), Op::SoftmaxCe { logits, label, probs }, ng))
    }

    /// Weighted sum of per-element Huber losses against a constant target.
    pub fn huber(&mut self, pred: Var, target: &[T], weight: &[T], delta: T) -> Result<Var> {
        let p = self.value(pred).as_slice();
        if p.len() != target.len() || p.len() != weight.len() {
            return Err(Error::dim("huber", p.len(), target.len().min(weight.len())));
        }
        let mut loss = T::zero();
        for ((&x, &t), &w) in p.iter().zip(target).zip(weight) {
            loss = loss + w * huber_elem(x - t, delta);
        }
        let ng = self.ng(pred);
        Ok(self.push(
            Matrix::scalar(loss),
            Op::Huber {
                pred,
                target: target.to_vec(),
                weight: weight.to_vec(),
                delta,
            },
            ng,
        ))
    }

    /// Reverse accumulation from a scalar output into parameter gradients.
    pub fn backward(&self, output: Var, store: &ParamStore<T>) -> Result<Grads<T>> {
        if self.shape(output) != (1, 1) {
            return Err(Error::Contract(format!(
                "backward needs a scalar output, got shape {:?}",
                self.shape(output)
            )));
        }
        let mut grads = store.zeros_like();
        let mut adj: Vec<Option<Matrix<T>>> = vec![None; output.0 + 1];
        adj[output.0] = Some(Matrix::scalar(T::one()));

        for idx in (0..=output.0).rev() {
            let Some(g) = adj[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            match &node.op {
                Op::Constant | Op::StopGradient => {}
                Op::Param(id) => {
                    let slot = grads.get_mut(*id);
                    if slot.shape() != g.shape() {
                        return Err(Error::dim(
                            format!("gradient for `{}`", store.name(*id)),
                            format!("{:?}", slot.shape()),
                            format!("{:?}", g.shape()),
                        ));
                    }
                    slot.add_assign(&g);
                }
                Op::MatMul(a, b) => {
                    let va = self.value(*a);
                    let vb = self.value(*b);
                    let (n, k) = va.shape();
                    let m = vb.cols();
                    if self.ng(*a) {
                        let mut da = Matrix::zeros(n, k);
                        matmul_bt_acc(g.as_slice(), vb.as_slice(), da.as_mut_slice(), n, m, k);
                        accumulate(&mut adj, *a, da);
                    }
                    if self.ng(*b) {
                        let mut db = Matrix::zeros(k, m);
                        matmul_at_acc(va.as_slice(), g.as_slice(), db.as_mut_slice(), n, k, m);
                        accumulate(&mut adj, *b, db);
                    }
                }
                Op::AddRow(x, bias) => {
                    if self.ng(*bias) {
                        let mut db = Matrix::zeros(1, g.cols());
                        for r in 0..g.rows() {
                            for (o, &v) in db.as_mut_slice().iter_mut().zip(g.row(r)) {
                                *o = *o + v;
                            }
                        }
                        accumulate(&mut adj, *bias, db);
                    }
                    if self.ng(*x) {
                        accumulate(&mut adj, *x, g);
                    }
                }
                Op::Add(a, b) => {
                    if self.ng(*a) {
                        accumulate(&mut adj, *a, g.clone());
                    }
                    if self.ng(*b) {
                        accumulate(&mut adj, *b, g);
                    }
                }
                Op::Sub(a, b) => {
                    if self.ng(*a) {
                        accumulate(&mut adj, *a, g.clone());
                    }
                    if self.ng(*b) {
                        accumulate(&mut adj, *b, g.map(|x| -x));
                    }
                }
                Op::Mul(a, b) => {
                    if self.ng(*a) {
                        let d = elementwise(&g, self.value(*b), |x, y| x * y);
                        accumulate(&mut adj, *a, d);
                    }
                    if self.ng(*b) {
                        let d = elementwise(&g, self.value(*a), |x, y| x * y);
                        accumulate(&mut adj, *b, d);
                    }
                }
                Op::Scale(a, s) => {
                    let s = *s;
                    accumulate(&mut adj, *a, g.map(|x| x * s));
                }
                Op::Relu(a) => {
                    let d = elementwise(&g, self.value(*a), |x, y| if y > T::zero() { x } else { T::zero() });
                    accumulate(&mut adj, *a, d);
                }
                Op::ConcatCols(a, b) => {
                    let ca = self.value(*a).cols();
                    let cb = self.value(*b).cols();
                    let rows = g.rows();
                    if self.ng(*a) {
                        let mut da = Matrix::zeros(rows, ca);
                        for r in 0..rows {
                            da.row_mut(r).copy_from_slice(&g.row(r)[..ca]);
                        }
                        accumulate(&mut adj, *a, da);
                    }
                    if self.ng(*b) {
                        let mut db = Matrix::zeros(rows, cb);
                        for r in 0..rows {
                            db.row_mut(r).copy_from_slice(&g.row(r)[ca..]);
                        }
                        accumulate(&mut adj, *b, db);
                    }
                }
                Op::Reshape(a) => {
                    let (r, c) = self.shape(*a);
                    accumulate(&mut adj, *a, g.reshaped(r, c)?);
                }
                Op::GatherRows(a, indices) => {
                    let (r, c) = self.shape(*a);
                    let mut da = Matrix::zeros(r, c);
                    for (out_r, &src) in indices.iter().enumerate() {
                        for (o, &v) in da.row_mut(src).iter_mut().zip(g.row(out_r)) {
                            *o = *o + v;
                        }
                    }
                    accumulate(&mut adj, *a, da);
                }
                Op::SumAll(a) => {
                    let (r, c) = self.shape(*a);
                    accumulate(&mut adj, *a, Matrix::filled(r, c, g.item()));
                }
                Op::SoftmaxCe { logits, label, probs } => {
                    let (r, c) = self.shape(*logits);
                    let s = g.item();
                    let mut d: Vec<T> = probs.iter().map(|&p| p * s).collect();
                    d[*label] = d[*label] - s;
                    accumulate(&mut adj, *logits, Matrix::from_vec(r, c, d)?);
                }
                Op::Huber {
                    pred,
                    target,
                    weight,
                    delta,
                } => {
                    let (r, c) = self.shape(*pred);
                    let s = g.item();
                    let d = self
                        .value(*pred)
                        .as_slice()
                        .iter()
                        .zip(target)
                        .zip(weight)
                        .map(|((&x, &t), &w)| s * w * huber_grad(x - t, *delta))
                        .collect();
                    accumulate(&mut adj, *pred, Matrix::from_vec(r, c, d)?);
                }
            }
        }
        Ok(grads)
    }
}

fn accumulate<T: Scalar>(adj: &mut [Option<Matrix<T>>], v: Var, g: Matrix<T>) {
    match &mut adj[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}

fn elementwise<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, f: impl Fn(T, T) -> T) -> Matrix<T> {
    let data = a.as_slice().iter().zip(b.as_slice()).map(|(&x, &y)| f(x, y)).collect();
    Matrix::from_vec(a.rows(), a.cols(), data).expect("same shape")
}

/// `0.5 e^2` for `|e| <= delta`, else `delta (|e| - delta / 2)`.
pub fn huber_elem<T: Scalar>(e: T, delta: T) -> T {
    let a = e.abs();
    if a <= delta {
        T::lit(0.5) * e * e
    } else {
        delta * (a - T::lit(0.5) * delta)
    }
}

fn huber_grad<T: Scalar>(e: T, delta: T) -> T {
    if e.abs() <= delta {
        e
    } else {
        delta * e.signum()
    }
}
