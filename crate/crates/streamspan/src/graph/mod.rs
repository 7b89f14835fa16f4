//! Exact in-memory graphs and the ground-truth oracles every sketch-based
//! algorithm is checked against: BFS distances, stretch, cuts, Laplacian
//! quadratic forms and effective resistances.

mod bfs;
mod cut;
pub mod io;
pub mod linalg;
mod resistance;

pub use bfs::{bfs_distances, bfs_limited, spanner_stretch, DistanceMap, StretchReport, UNREACHABLE};
pub use cut::{cut_weight, layer_cut_check, layer_cut_check_to_depth, LayerCutReport};
pub use resistance::{
    effective_resistance, laplacian_quadratic_form, sum_weighted_resistances, ResistanceOracle,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::collections::{BTreeMap, BTreeSet};

/// Dense 0-based vertex index.
pub type VertexId = u32;

/// Unordered vertex pair stored as `(min, max)`.
pub type Edge = (VertexId, VertexId);

/// Canonical `(min, max)` form of a pair.
#[inline]
pub fn canonical(u: VertexId, v: VertexId) -> Edge {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

fn check_pair(n: usize, u: VertexId, v: VertexId) -> Result<Edge> {
    for x in [u, v] {
        if x as usize >= n {
            return Err(Error::VertexOutOfRange { vertex: x as u64, n });
        }
    }
    if u == v {
        return Err(Error::SelfLoop(u));
    }
    Ok(canonical(u, v))
}

/// Simple undirected graph on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnweightedGraph {
    n: usize,
    edges: BTreeSet<Edge>,
    adj: Vec<Vec<VertexId>>,
}

impl UnweightedGraph {
    pub fn empty(n: usize) -> Self {
        UnweightedGraph { n, edges: BTreeSet::new(), adj: vec![Vec::new(); n] }
    }

    /// Builds a graph, rejecting out-of-range endpoints and self-loops.
    /// Duplicate pairs collapse to one edge.
    pub fn from_edges<I: IntoIterator<Item = (VertexId, VertexId)>>(n: usize, edges: I) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            set.insert(check_pair(n, u, v)?);
        }
        Ok(Self::from_canonical_set(n, set))
    }

    fn from_canonical_set(n: usize, edges: BTreeSet<Edge>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        UnweightedGraph { n, edges, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges in ascending canonical order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edges.contains(&canonical(u, v))
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    /// Inserts an edge; returns false if it was already present.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool> {
        let e = check_pair(self.n, u, v)?;
        if !self.edges.insert(e) {
            return Ok(false);
        }
        for (a, b) in [(e.0, e.1), (e.1, e.0)] {
            let list = &mut self.adj[a as usize];
            let pos = list.binary_search(&b).unwrap_err();
            list.insert(pos, b);
        }
        Ok(true)
    }

    /// Removes an edge; returns false if it was absent.
    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> bool {
        let e = canonical(u, v);
        if !self.edges.remove(&e) {
            return false;
        }
        for (a, b) in [(e.0, e.1), (e.1, e.0)] {
            let list = &mut self.adj[a as usize];
            if let Ok(pos) = list.binary_search(&b) {
                list.remove(pos);
            }
        }
        true
    }

    /// True when every edge of `self` is an edge of `other`.
    pub fn is_subgraph_of(&self, other: &UnweightedGraph) -> bool {
        self.n == other.n && self.edges.iter().all(|e| other.edges.contains(e))
    }

    /// First edge of `self` missing from `other`, as a subgraph-violation error.
    pub fn check_subgraph_of(&self, other: &UnweightedGraph) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch(self.n, other.n));
        }
        match self.edges.iter().find(|e| !other.edges.contains(e)) {
            Some(&(u, v)) => Err(Error::SubgraphViolation(u, v)),
            None => Ok(()),
        }
    }

    /// Edge-set union on the same vertex set.
    pub fn union(&self, other: &UnweightedGraph) -> UnweightedGraph {
        let mut set = self.edges.clone();
        set.extend(other.edges.iter().copied());
        Self::from_canonical_set(self.n.max(other.n), set)
    }

    pub fn extend_edges<I: IntoIterator<Item = Edge>>(&mut self, edges: I) -> Result<()> {
        for (u, v) in edges {
            self.add_edge(u, v)?;
        }
        Ok(())
    }

    /// Subgraph induced on `vertices`, keeping the global vertex ids.
    pub fn induced(&self, vertices: &[VertexId]) -> UnweightedGraph {
        let mut inside = vec![false; self.n];
        for &v in vertices {
            inside[v as usize] = true;
        }
        let set = self
            .edges
            .iter()
            .copied()
            .filter(|&(u, v)| inside[u as usize] && inside[v as usize])
            .collect();
        Self::from_canonical_set(self.n, set)
    }

    /// Connected-component label per vertex, labels in order of first vertex.
    pub fn components(&self) -> (usize, Vec<u32>) {
        let mut label = vec![u32::MAX; self.n];
        let mut count = 0u32;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s as VertexId);
            while let Some(x) = stack.pop() {
                for &y in &self.adj[x as usize] {
                    if label[y as usize] == u32::MAX {
                        label[y as usize] = count;
                        stack.push(y);
                    }
                }
            }
            count += 1;
        }
        (count as usize, label)
    }

    /// Unit-weight copy.
    pub fn to_weighted<T: Scalar>(&self) -> WeightedGraph<T> {
        WeightedGraph::from_canonical_map(self.n, self.edges.iter().map(|&e| (e, T::one())).collect())
    }
}

/// Simple undirected graph with positive edge weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph<T: Scalar> {
    n: usize,
    edges: BTreeMap<Edge, T>,
    adj: Vec<Vec<(VertexId, T)>>,
}

impl<T: Scalar> WeightedGraph<T> {
    pub fn empty(n: usize) -> Self {
        WeightedGraph { n, edges: BTreeMap::new(), adj: vec![Vec::new(); n] }
    }

    /// Builds a weighted graph; weights must be positive and finite, and a
    /// repeated pair keeps its last weight.
    pub fn from_edges<I: IntoIterator<Item = (VertexId, VertexId, T)>>(n: usize, edges: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (u, v, w) in edges {
            let e = check_pair(n, u, v)?;
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::Parameter(format!("edge ({u}, {v}) has non-positive weight {w}")));
            }
            map.insert(e, w);
        }
        Ok(Self::from_canonical_map(n, map))
    }

    fn from_canonical_map(n: usize, edges: BTreeMap<Edge, T>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (&(u, v), &w) in &edges {
            adj[u as usize].push((v, w));
            adj[v as usize].push((u, w));
        }
        WeightedGraph { n, edges, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Edge, T)> + '_ {
        self.edges.iter().map(|(&e, &w)| (e, w))
    }

    pub fn weight(&self, u: VertexId, v: VertexId) -> Option<T> {
        self.edges.get(&canonical(u, v)).copied()
    }

    /// Neighbors with weights, in ascending neighbor order.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, T)] {
        &self.adj[v as usize]
    }

    pub fn weighted_degree(&self, v: VertexId) -> T {
        self.adj[v as usize].iter().map(|&(_, w)| w).sum()
    }

    /// Total weighted degree, i.e. twice the total edge weight.
    pub fn volume(&self) -> T {
        self.edges.values().copied().sum::<T>() + self.edges.values().copied().sum::<T>()
    }

    /// Same edge set with every weight set to 1.
    pub fn unweighted(&self) -> UnweightedGraph {
        UnweightedGraph::from_canonical_set(self.n, self.edges.keys().copied().collect())
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self::from_canonical_map(self.n, self.edges.iter().map(|(&e, &w)| (e, w * factor)).collect())
    }

    /// Converts weights to another scalar type.
    pub fn cast<U: Scalar>(&self) -> WeightedGraph<U> {
        WeightedGraph::from_canonical_map(
            self.n,
            self.edges.iter().map(|(&e, &w)| (e, U::from(w).expect("representable weight"))).collect(),
        )
    }

    /// Subgraph induced on `vertices`, keeping global ids.
    pub fn induced(&self, vertices: &[VertexId]) -> Self {
        let mut inside = vec![false; self.n];
        for &v in vertices {
            inside[v as usize] = true;
        }
        Self::from_canonical_map(
            self.n,
            self.edges
                .iter()
                .filter(|(&(u, v), _)| inside[u as usize] && inside[v as usize])
                .map(|(&e, &w)| (e, w))
                .collect(),
        )
    }
}
