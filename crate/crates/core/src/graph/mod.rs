//! Vertex-weighted undirected graphs.
//!
//! [`StaticGraph`] is an immutable compressed adjacency layout used for
//! snapshots, local search and inference. [`DynamicGraph`] is the mutable
//! working graph that reduction rules rewrite; every mutation is journaled so
//! it can be rolled back.

mod dynamic;
mod io;

pub use dynamic::{DynamicGraph, Status};
pub use io::{parse_graph, read_graph_file, read_solution, write_graph, write_solution};

use thiserror::Error;

/// Dense vertex index, 0-based.
pub type VertexId = usize;

/// Vertex weight. Weights are strictly positive on every valid graph.
pub type Weight = i64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("asymmetric adjacency between vertices {0} and {1}")]
    Asymmetric(VertexId, VertexId),
    #[error("non-positive weight at vertex {0}")]
    NonPositiveWeight(VertexId),
    #[error("vertex {0} out of range")]
    OutOfRange(VertexId),
    #[error("vertex {0} is not active")]
    Inactive(VertexId),
    #[error("edge {0}-{1} already present")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge {0}-{1} not present")]
    MissingEdge(VertexId, VertexId),
    #[error("neighbor list of vertex {0} is not sorted or has duplicates")]
    Unsorted(VertexId),
    #[error("{0}")]
    Io(String),
}

/// Immutable weighted graph in compressed sparse row layout.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StaticGraph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    weights: Vec<Weight>,
}

impl StaticGraph {
    /// Builds a graph from per-vertex neighbor lists. Lists are sorted here;
    /// symmetry, loops, duplicates and weights are validated.
    pub fn from_adjacency(
        weights: Vec<Weight>,
        mut adjacency: Vec<Vec<VertexId>>,
    ) -> Result<Self, GraphError> {
        assert_eq!(weights.len(), adjacency.len());
        let mut offsets = Vec::with_capacity(weights.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in adjacency.iter_mut() {
            list.sort_unstable();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        let g = StaticGraph {
            offsets,
            targets,
            weights,
        };
        g.validate()?;
        Ok(g)
    }

    /// Builds a graph from an undirected edge list. Duplicate edges are merged.
    pub fn from_edges(
        weights: Vec<Weight>,
        edges: &[(VertexId, VertexId)],
    ) -> Result<Self, GraphError> {
        let n = weights.len();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(GraphError::OutOfRange(u));
            }
            if v >= n {
                return Err(GraphError::OutOfRange(v));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in adjacency.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Self::from_adjacency(weights, adjacency)
    }

    /// Checks symmetry, sortedness, absence of loops and positive weights.
    pub fn validate(&self) -> Result<(), GraphError> {
        for v in 0..self.n() {
            if self.weights[v] <= 0 {
                return Err(GraphError::NonPositiveWeight(v));
            }
            let nbrs = self.neighbors(v);
            for (i, &u) in nbrs.iter().enumerate() {
                if u >= self.n() {
                    return Err(GraphError::OutOfRange(u));
                }
                if u == v {
                    return Err(GraphError::SelfLoop(v));
                }
                if i > 0 && nbrs[i - 1] >= u {
                    return Err(GraphError::Unsorted(v));
                }
                if !self.has_edge(u, v) {
                    return Err(GraphError::Asymmetric(v, u));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn weight(&self, v: VertexId) -> Weight {
        self.weights[v]
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn total_weight(&self) -> Weight {
        self.weights.iter().sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn set_weight(&self, set: &[VertexId]) -> Weight {
        set.iter().map(|&v| self.weights[v]).sum()
    }

    /// True if no two members of `set` are adjacent (duplicates count as a
    /// violation).
    pub fn is_independent(&self, set: &[VertexId]) -> bool {
        let mut member = vec![false; self.n()];
        for &v in set {
            if v >= self.n() || member[v] {
                return false;
            }
            member[v] = true;
        }
        set.iter()
            .all(|&v| self.neighbors(v).iter().all(|&u| !member[u]))
    }

    /// Induced subgraph on `vertices`; returns the graph and the new-to-old
    /// vertex mapping (new id `i` corresponds to `vertices[i]` after sorting).
    pub fn induced_subgraph(&self, vertices: &[VertexId]) -> (StaticGraph, Vec<VertexId>) {
        let mut to_old: Vec<VertexId> = vertices.to_vec();
        to_old.sort_unstable();
        to_old.dedup();
        let mut to_new = vec![usize::MAX; self.n()];
        for (i, &v) in to_old.iter().enumerate() {
            to_new[v] = i;
        }
        let mut offsets = Vec::with_capacity(to_old.len() + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::with_capacity(to_old.len());
        offsets.push(0);
        for &v in &to_old {
            // old ids are sorted, and the old-to-new map is monotone, so the
            // mapped neighbor list stays sorted
            targets.extend(
                self.neighbors(v)
                    .iter()
                    .filter(|&&u| to_new[u] != usize::MAX)
                    .map(|&u| to_new[u]),
            );
            offsets.push(targets.len());
            weights.push(self.weights[v]);
        }
        (
            StaticGraph {
                offsets,
                targets,
                weights,
            },
            to_old,
        )
    }
}
