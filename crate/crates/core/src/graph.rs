//! Interaction graph construction.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backbone::CandidateSet;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::scene::Scene;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GraphType {
    None,
    AvStar,
    RandomStar,
    Dynamic,
    FullyConnected,
}

impl GraphType {
    pub const ALL: [GraphType; 5] = [
        GraphType::None,
        GraphType::RandomStar,
        GraphType::AvStar,
        GraphType::Dynamic,
        GraphType::FullyConnected,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphType::None => "none",
            GraphType::AvStar => "av-star",
            GraphType::RandomStar => "random-star",
            GraphType::Dynamic => "dynamic",
            GraphType::FullyConnected => "fully-connected",
        }
    }
}

impl fmt::Display for GraphType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        GraphType::ALL
            .into_iter()
            .find(|g| g.as_str() == norm)
            .ok_or_else(|| Error::Config(format!("unknown graph type '{s}' (expected none, av-star, random-star, dynamic, fully-connected)")))
    }
}

/// Undirected graph over agent indices; edges are sorted `(i, j)` pairs with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    graph_type: GraphType,
}

impl InteractionGraph {
    /// Normalizes edge orientation and order; rejects self-loops, duplicates and out-of-range nodes.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>, graph_type: GraphType) -> Result<Self> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Contract(format!("self-loop on node {a}")));
            }
            if a.max(b) >= node_count {
                return Err(Error::Index {
                    index: a.max(b),
                    len: node_count,
                });
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        let before = out.len();
        out.dedup();
        if out.len() != before {
            return Err(Error::Contract("duplicate edge".into()));
        }
        Ok(Self {
            node_count,
            edges: out,
            graph_type,
        })
    }

    pub fn empty(node_count: usize) -> Self {
        Self {
            node_count,
            edges: Vec::new(),
            graph_type: GraphType::None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn graph_type(&self) -> GraphType {
        self.graph_type
    }

    /// Position of edge `{a, b}` in [`Self::edges`].
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    /// Neighbor lists, each sorted ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for n in &mut adj {
            n.sort_unstable();
        }
        adj
    }

    /// True when the graph has no cycles.
    pub fn is_forest(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.node_count).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(i, j) in &self.edges {
            let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
            if ri == rj {
                return false;
            }
            parent[ri] = rj;
        }
        true
    }

    /// Longest shortest path over all connected pairs.
    pub fn diameter(&self) -> usize {
        let adj = self.adjacency();
        let mut best = 0;
        for s in 0..self.node_count {
            let mut dist = vec![usize::MAX; self.node_count];
            dist[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                best = best.max(dist[u]);
                for &v in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        best
    }
}

/// Whether two agents' trajectories ever come within half their summed lengths.
pub fn proximity_edge(top_i: &[Point2], top_j: &[Point2], length_i: f64, length_j: f64) -> bool {
    let reach = 0.5 * (length_i + length_j);
    top_i.iter().zip(top_j).any(|(a, b)| a.dist(*b) <= reach)
}

fn star(n: usize, center: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).filter(move |&k| k != center).map(move |k| (center, k))
}

fn all_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Builds the graph of the requested type. `candidates` is needed only for [`GraphType::Dynamic`].
pub fn build_graph(
    graph_type: GraphType,
    scene: &Scene,
    candidates: Option<&CandidateSet>,
    seed: u64,
) -> Result<InteractionGraph> {
    let n = scene.num_agents();
    match graph_type {
        GraphType::None => InteractionGraph::new(n, [], graph_type),
        GraphType::AvStar => {
            let av = scene
                .av_index()
                .ok_or_else(|| Error::Contract(format!("scene {} has no AV for an av-star graph", scene.scene_id)))?;
            InteractionGraph::new(n, star(n, av), graph_type)
        }
        GraphType::RandomStar => {
            let center = if n == 0 { 0 } else { ChaCha8Rng::seed_from_u64(seed).gen_range(0..n) };
            InteractionGraph::new(n, star(n, center), graph_type)
        }
        GraphType::FullyConnected => InteractionGraph::new(n, all_pairs(n), graph_type),
        GraphType::Dynamic => {
            let c = candidates.ok_or_else(|| Error::Contract("dynamic graph needs candidates".into()))?;
            if c.num_agents() != n {
                return Err(Error::dim("candidate agents", n, c.num_agents()));
            }
            let tops: Vec<&[Point2]> = (0..n).map(|i| c.trajectories[i][c.top(i)].as_slice()).collect();
            let edges = all_pairs(n)
                .filter(|&(i, j)| proximity_edge(tops[i], tops[j], scene.agents[i].length, scene.agents[j].length))
                .collect::<Vec<_>>();
            InteractionGraph::new(n, edges, graph_type)
        }
    }
}
