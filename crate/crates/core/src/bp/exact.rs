use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::pairwise::PairPotentialTable;
use crate::scalar::{log_sum_exp, Scalar};

/// Largest joint state space enumerated by [`brute_force_joint`].
pub const MAX_EXACT_STATES: usize = 1_000_000;

/// Fully enumerated joint distribution. States are indexed in mixed radix
/// with agent 0 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactJoint<T> {
    pub k: usize,
    pub node_count: usize,
    pub probs: Vec<T>,
    pub log_z: T,
    pub marginals: Vec<Vec<T>>,
    /// Most probable state; the lexicographically smallest among ties.
    pub argmax: Vec<usize>,
}

impl<T: Scalar> ExactJoint<T> {
    pub fn state(&self, mut index: usize) -> Vec<usize> {
        let mut s = vec![0; self.node_count];
        for slot in s.iter_mut().rev() {
            *slot = index % self.k;
            index /= self.k;
        }
        s
    }

    pub fn index(&self, state: &[usize]) -> usize {
        state.iter().fold(0, |acc, &x| acc * self.k + x)
    }

    /// `p(s_i = a, s_j = b)` flattened row-major.
    pub fn pair_marginal(&self, i: usize, j: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.k * self.k];
        for (idx, &p) in self.probs.iter().enumerate() {
            let s = self.state(idx);
            out[s[i] * self.k + s[j]] = out[s[i] * self.k + s[j]] + p;
        }
        out
    }

    /// Marginals of every agent given `s_agent = candidate`.
    pub fn conditional_marginals(&self, agent: usize, candidate: usize) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.k]; self.node_count];
        let mut mass = T::zero();
        for (idx, &p) in self.probs.iter().enumerate() {
            let s = self.state(idx);
            if s[agent] != candidate {
                continue;
            }
            mass = mass + p;
            for (n, &x) in s.iter().enumerate() {
                out[n][x] = out[n][x] + p;
            }
        }
        for row in &mut out {
            for x in row.iter_mut() {
                *x = *x / mass;
            }
        }
        out
    }

    pub fn neg_log_prob(&self, state: &[usize]) -> T {
        -self.probs[self.index(state)].ln()
    }
}

/// Enumerates all `K^A` joint states.
pub fn brute_force_joint<T: Scalar>(
    graph: &InteractionGraph,
    unary: &[Vec<T>],
    tables: &[PairPotentialTable<T>],
) -> Result<ExactJoint<T>> {
    let n = graph.node_count();
    if unary.len() != n {
        return Err(Error::dim("unary logits", n, unary.len()));
    }
    let k = unary.first().map_or(1, Vec::len);
    let states = (k as f64).powi(n as i32);
    if states > MAX_EXACT_STATES as f64 {
        return Err(Error::Infeasible {
            states,
            limit: MAX_EXACT_STATES,
        });
    }
    let mut aligned = Vec::with_capacity(graph.edges().len());
    for &(i, j) in graph.edges() {
        let t = tables
            .iter()
            .find(|t| t.i == i && t.j == j)
            .ok_or_else(|| Error::Contract(format!("no pair table for edge ({i}, {j})")))?;
        aligned.push(t);
    }
    let total = states as usize;
    let mut energy = Vec::with_capacity(total);
    let mut s = vec![0usize; n];
    for _ in 0..total {
        let mut e = T::zero();
        for (u, &x) in unary.iter().zip(&s) {
            e = e + u[x];
        }
        for t in &aligned {
            e = e + t.at(s[t.i], s[t.j]);
        }
        energy.push(e);
        for slot in s.iter_mut().rev() {
            *slot += 1;
            if *slot < k {
                break;
            }
            *slot = 0;
        }
    }
    let log_z = log_sum_exp(&energy);
    let probs: Vec<T> = energy.iter().map(|&e| (e - log_z).exp()).collect();
    let mut best = 0;
    for (idx, &e) in energy.iter().enumerate() {
        if e > energy[best] {
            best = idx;
        }
    }
    let mut joint = ExactJoint {
        k,
        node_count: n,
        probs,
        log_z,
        marginals: vec![vec![T::zero(); k]; n],
        argmax: Vec::new(),
    };
    joint.argmax = joint.state(best);
    for idx in 0..total {
        let st = joint.state(idx);
        let p = joint.probs[idx];
        for (node, &x) in st.iter().enumerate() {
            joint.marginals[node][x] = joint.marginals[node][x] + p;
        }
    }
    Ok(joint)
}
