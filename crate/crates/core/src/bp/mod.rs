//! Log-domain message passing on the pairwise MRF, plus an exact
//! enumeration oracle for small problems.

mod exact;

pub use exact::{brute_force_joint, ExactJoint, MAX_EXACT_STATES};

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::InteractionGraph;
use crate::pairwise::PairPotentialTable;
use crate::scalar::{argmax, log_sum_exp, normalize_log, Scalar, BLOCKED_LOGIT};

pub const DEFAULT_ITERATIONS: usize = 3;

/// Directed messages; edge `e = (i, j)` owns slot `2e` for `i -> j` and `2e + 1` for `j -> i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MessageSet<T> {
    pub messages: Vec<Vec<T>>,
    pub iteration: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Beliefs<T> {
    pub k: usize,
    /// Normalized node marginal logits.
    pub node: Vec<Vec<T>>,
    /// Normalized pair belief logits, aligned with `edges`, row-major `a * k + b`.
    pub pair: Vec<Vec<T>>,
    pub edges: Vec<(usize, usize)>,
}

impl<T: Scalar> Beliefs<T> {
    pub fn pair_for(&self, i: usize, j: usize) -> Option<&[T]> {
        self.edges.binary_search(&(i, j)).ok().map(|e| self.pair[e].as_slice())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointDecode<T> {
    pub assignment: Vec<usize>,
    /// Unnormalized joint log-potential of `assignment`.
    pub score: T,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Semiring {
    Sum,
    Max,
}

struct Problem<'a, T> {
    k: usize,
    edges: &'a [(usize, usize)],
    adj: Vec<Vec<(usize, usize)>>,
    unary: &'a [Vec<T>],
    tables: Vec<&'a PairPotentialTable<T>>,
}

impl<'a, T: Scalar> Problem<'a, T> {
    fn new(graph: &'a InteractionGraph, unary: &'a [Vec<T>], tables: &'a [PairPotentialTable<T>]) -> Result<Self> {
        let n = graph.node_count();
        if unary.len() != n {
            return Err(Error::dim("unary logits", n, unary.len()));
        }
        let k = unary.first().map_or(0, Vec::len);
        if let Some(bad) = unary.iter().find(|u| u.len() != k) {
            return Err(Error::dim("unary logits per agent", k, bad.len()));
        }
        let edges = graph.edges();
        let mut aligned = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            let t = tables
                .iter()
                .find(|t| t.i == i && t.j == j)
                .ok_or_else(|| Error::Contract(format!("no pair table for edge ({i}, {j})")))?;
            if t.k != k {
                return Err(Error::dim("pair table K", k, t.k));
            }
            aligned.push(t);
        }
        let mut adj = vec![Vec::new(); n];
        for (e, &(i, j)) in edges.iter().enumerate() {
            adj[i].push((j, e));
            adj[j].push((i, e));
        }
        Ok(Self {
            k,
            edges,
            adj,
            unary,
            tables: aligned,
        })
    }

    /// Slot of the message travelling from `from` along edge `e`.
    fn slot(&self, e: usize, from: usize) -> usize {
        if self.edges[e].0 == from {
            2 * e
        } else {
            2 * e + 1
        }
    }

    /// Unary plus all incoming messages into `node` except along `skip_edge`.
    fn cavity(&self, msgs: &[Vec<T>], node: usize, skip_edge: Option<usize>) -> Vec<T> {
        let mut acc = self.unary[node].clone();
        for &(other, e) in &self.adj[node] {
            if Some(e) == skip_edge {
                continue;
            }
            let m = &msgs[self.slot(e, other)];
            for (a, x) in acc.iter_mut().zip(m) {
                *a = *a + *x;
            }
        }
        acc
    }

    fn run(&self, iterations: usize, ring: Semiring) -> Result<MessageSet<T>> {
        if iterations == 0 {
            return Err(Error::Config("message passing needs at least one iteration".into()));
        }
        let k = self.k;
        let mut msgs = vec![vec![T::zero(); k]; 2 * self.edges.len()];
        let mut buf = vec![T::zero(); k];
        for _ in 0..iterations {
            let mut next = msgs.clone();
            for (e, &(i, j)) in self.edges.iter().enumerate() {
                let table = self.tables[e];
                for (from, to) in [(i, j), (j, i)] {
                    let cav = self.cavity(&msgs, from, Some(e));
                    let out = &mut next[self.slot(e, from)];
                    for (t_state, slot) in out.iter_mut().enumerate() {
                        for (f_state, b) in buf.iter_mut().enumerate() {
                            *b = cav[f_state] + table.between(from, f_state, t_state);
                        }
                        *slot = match ring {
                            Semiring::Sum => log_sum_exp(&buf),
                            Semiring::Max => buf.iter().copied().fold(T::neg_infinity(), T::max),
                        };
                    }
                    normalize_log(out);
                    debug_assert!(out.iter().all(|x| x.is_finite()), "message {from}->{to} not finite");
                }
            }
            msgs = next;
        }
        Ok(MessageSet {
            messages: msgs,
            iteration: iterations,
        })
    }
}

/// Sum-product marginals after `iterations` synchronous sweeps.
pub fn sum_product<T: Scalar>(
    graph: &InteractionGraph,
    unary: &[Vec<T>],
    tables: &[PairPotentialTable<T>],
    iterations: usize,
) -> Result<Beliefs<T>> {
    let p = Problem::new(graph, unary, tables)?;
    let msgs = p.run(iterations, Semiring::Sum)?.messages;
    let node = (0..graph.node_count())
        .map(|n| {
            let mut b = p.cavity(&msgs, n, None);
            normalize_log(&mut b);
            b
        })
        .collect();
    let k = p.k;
    let pair = p
        .edges
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| {
            let ci = p.cavity(&msgs, i, Some(e));
            let cj = p.cavity(&msgs, j, Some(e));
            let mut b: Vec<T> = (0..k * k).map(|r| ci[r / k] + cj[r % k] + p.tables[e].logits[r]).collect();
            normalize_log(&mut b);
            b
        })
        .collect();
    Ok(Beliefs {
        k,
        node,
        pair,
        edges: p.edges.to_vec(),
    })
}

/// Max-product decode. Each connected component is rooted at its lowest index;
/// the root takes the argmax of its max-belief and every later node maximizes
/// over its already-decoded neighbors' actual potentials plus messages from
/// the rest. On trees this is exact backtracking.
pub fn max_product<T: Scalar>(
    graph: &InteractionGraph,
    unary: &[Vec<T>],
    tables: &[PairPotentialTable<T>],
    iterations: usize,
) -> Result<JointDecode<T>> {
    let p = Problem::new(graph, unary, tables)?;
    let msgs = p.run(iterations, Semiring::Max)?.messages;
    let n = graph.node_count();
    let mut assignment: Vec<Option<usize>> = vec![None; n];
    for root in 0..n {
        if assignment[root].is_some() {
            continue;
        }
        let mut queue = VecDeque::from([root]);
        let mut queued = vec![false; n];
        queued[root] = true;
        while let Some(u) = queue.pop_front() {
            let mut score = p.unary[u].clone();
            for &(v, e) in &p.adj[u] {
                match assignment[v] {
                    Some(sv) => {
                        for (a, s) in score.iter_mut().enumerate() {
                            *s = *s + p.tables[e].between(u, a, sv);
                        }
                    }
                    None => {
                        let m = &msgs[p.slot(e, v)];
                        for (s, x) in score.iter_mut().zip(m) {
                            *s = *s + *x;
                        }
                    }
                }
            }
            assignment[u] = Some(argmax(&score));
            for &(v, _) in &p.adj[u] {
                if !queued[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    let assignment: Vec<usize> = assignment.into_iter().map(|a| a.unwrap_or(0)).collect();
    let score = joint_log_potential(&assignment, unary, &p.tables);
    Ok(JointDecode { assignment, score })
}

fn joint_log_potential<T: Scalar>(state: &[usize], unary: &[Vec<T>], tables: &[&PairPotentialTable<T>]) -> T {
    let mut s = T::zero();
    for (u, &x) in unary.iter().zip(state) {
        s = s + u[x];
    }
    for t in tables {
        s = s + t.at(state[t.i], state[t.j]);
    }
    s
}

/// Pins agent `agent` to candidate `candidate` by blocking its other states.
pub fn conditional_clamp<T: Scalar>(unary: &[Vec<T>], agent: usize, candidate: usize) -> Result<Vec<Vec<T>>> {
    let row = unary.get(agent).ok_or(Error::Index {
        index: agent,
        len: unary.len(),
    })?;
    if candidate >= row.len() {
        return Err(Error::Index {
            index: candidate,
            len: row.len(),
        });
    }
    let mut out = unary.to_vec();
    for (s, x) in out[agent].iter_mut().enumerate() {
        if s != candidate {
            *x = T::lit(BLOCKED_LOGIT);
        }
    }
    Ok(out)
}

/// The `n` most likely `(a, b)` cells for agents `i < j`, best first; ties
/// break lexicographically. Falls back to independent node beliefs when the
/// pair is not an edge.
pub fn top_n_joint_pairs<T: Scalar>(beliefs: &Beliefs<T>, i: usize, j: usize, n: usize) -> Result<Vec<((usize, usize), T)>> {
    if i >= j || j >= beliefs.node.len() {
        return Err(Error::Contract(format!(
            "pair ({i}, {j}) invalid for {} agents",
            beliefs.node.len()
        )));
    }
    let k = beliefs.k;
    let scores: Vec<T> = match beliefs.pair_for(i, j) {
        Some(p) => p.to_vec(),
        None => (0..k * k).map(|r| beliefs.node[i][r / k] + beliefs.node[j][r % k]).collect(),
    };
    let n = if n > k * k {
        log::warn!("requested top {n} joint pairs but only {} exist; clipping", k * k);
        k * k
    } else {
        n
    };
    let mut cells: Vec<usize> = (0..k * k).collect();
    cells.sort_by(|&x, &y| scores[y].partial_cmp(&scores[x]).unwrap_or(std::cmp::Ordering::Equal).then(x.cmp(&y)));
    Ok(cells.into_iter().take(n).map(|r| ((r / k, r % k), scores[r])).collect())
}
