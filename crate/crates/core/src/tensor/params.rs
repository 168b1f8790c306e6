use std::collections::HashMap;

use rand::Rng;

use super::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Handle to a parameter inside a [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

/// Named trainable parameters. Names are unique and shapes never change after insertion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore<T> {
    names: Vec<String>,
    values: Vec<Matrix<T>>,
    index: HashMap<String, ParamId>,
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            values: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Matrix<T>) -> Result<ParamId> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::Config(format!("duplicate parameter name `{name}`")));
        }
        let id = ParamId(self.values.len());
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.values.push(value);
        Ok(id)
    }

    /// Adds an `in x out` weight (`{name}.w`, Glorot-uniform) and a zero `1 x out` bias (`{name}.b`).
    pub fn insert_dense<R: Rng>(&mut self, rng: &mut R, name: &str, fan_in: usize, fan_out: usize) -> Result<()> {
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w: Vec<T> = (0..fan_in * fan_out).map(|_| T::lit(rng.gen_range(-a..a))).collect();
        self.insert(format!("{name}.w"), Matrix::from_vec(fan_in, fan_out, w)?)?;
        self.insert(format!("{name}.b"), Matrix::zeros(1, fan_out))?;
        Ok(())
    }

    /// Adds a dense layer with all-zero weight and bias.
    pub fn insert_dense_zero(&mut self, name: &str, fan_in: usize, fan_out: usize) -> Result<()> {
        self.insert(format!("{name}.w"), Matrix::zeros(fan_in, fan_out))?;
        self.insert(format!("{name}.b"), Matrix::zeros(1, fan_out))?;
        Ok(())
    }

    pub fn id(&self, name: &str) -> Result<ParamId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown parameter `{name}`")))
    }

    pub fn get(&self, id: ParamId) -> &Matrix<T> {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Matrix<T> {
        &mut self.values[id.0]
    }

    pub fn by_name(&self, name: &str) -> Result<&Matrix<T>> {
        Ok(self.get(self.id(name)?))
    }

    pub fn by_name_mut(&mut self, name: &str) -> Result<&mut Matrix<T>> {
        let id = self.id(name)?;
        Ok(self.get_mut(id))
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scalar_count(&self) -> usize {
        self.values.iter().map(Matrix::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Matrix<T>)> {
        self.names
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(i, (n, v))| (ParamId(i), n.as_str(), v))
    }

    pub fn zeros_like(&self) -> Grads<T> {
        Grads {
            values: self.values.iter().map(|m| Matrix::zeros(m.rows(), m.cols())).collect(),
        }
    }
}

/// Gradients aligned index-for-index with a [`ParamStore`].
#[derive(Clone, Debug, PartialEq)]
pub struct Grads<T> {
    values: Vec<Matrix<T>>,
}

impl<T: Scalar> Grads<T> {
    pub fn get(&self, id: ParamId) -> &Matrix<T> {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Matrix<T> {
        &mut self.values[id.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Matrix<T>)> {
        self.values.iter().enumerate().map(|(i, m)| (ParamId(i), m))
    }

    /// Adds `other` into `self`, parameter by parameter in index order.
    pub fn accumulate(&mut self, other: &Grads<T>) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            a.add_assign(b);
        }
    }

    pub fn scale(&mut self, s: T) {
        for m in &mut self.values {
            for x in m.as_mut_slice() {
                *x = *x * s;
            }
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, g| m.max(g.max_abs()))
    }
}
