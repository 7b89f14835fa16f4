use super::{Edge, UnweightedGraph, VertexId};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Sentinel hop count for vertices not reachable from the source.
pub const UNREACHABLE: u32 = u32::MAX;

/// Hop distances from one source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMap {
    pub source: VertexId,
    pub dist: Vec<u32>,
}

impl DistanceMap {
    pub fn get(&self, v: VertexId) -> Option<u32> {
        match self.dist[v as usize] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }
}

pub fn bfs_distances(g: &UnweightedGraph, src: VertexId) -> Result<DistanceMap> {
    bfs_limited(g, src, u32::MAX - 1)
}

/// BFS that stops expanding past depth `limit`; farther vertices read as
/// `UNREACHABLE`.
pub fn bfs_limited(g: &UnweightedGraph, src: VertexId, limit: u32) -> Result<DistanceMap> {
    if src as usize >= g.n() {
        return Err(Error::VertexOutOfRange { vertex: src as u64, n: g.n() });
    }
    let mut dist = vec![UNREACHABLE; g.n()];
    dist[src as usize] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[x as usize];
        if dx >= limit {
            continue;
        }
        for &y in g.neighbors(x) {
            if dist[y as usize] == UNREACHABLE {
                dist[y as usize] = dx + 1;
                queue.push_back(y);
            }
        }
    }
    Ok(DistanceMap { source: src, dist })
}

/// Worst distance inflation of `h` over the edges of `g`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StretchReport {
    /// `None` when some edge of `g` has its endpoints disconnected in `h`.
    pub max_stretch: Option<u32>,
    pub witness_edge: Option<Edge>,
}

impl StretchReport {
    pub fn within(&self, bound: u64) -> bool {
        matches!(self.max_stretch, Some(s) if s as u64 <= bound)
    }
}

/// Max over edges `(u, v)` of `g` of `d_h(u, v)`; by the triangle inequality
/// this equals the all-pairs stretch. An edgeless `g` has stretch 1.
pub fn spanner_stretch(g: &UnweightedGraph, h: &UnweightedGraph) -> Result<StretchReport> {
    h.check_subgraph_of(g)?;
    let n = g.n();
    let mut best: u32 = 1;
    let mut witness: Option<Edge> = None;
    let mut dist = vec![UNREACHABLE; n];
    let mut touched: Vec<VertexId> = Vec::new();
    let mut queue = VecDeque::new();
    for u in 0..n as VertexId {
        let targets: Vec<VertexId> = g.neighbors(u).iter().copied().filter(|&v| v > u).collect();
        if targets.is_empty() {
            continue;
        }
        // Targets already present in h have distance 1.
        let mut pending = targets.iter().filter(|&&v| !h.has_edge(u, v)).count();
        if witness.is_none() {
            witness = Some((u, targets[0]));
        }
        if pending == 0 {
            continue;
        }
        let mut is_target = vec![false; n];
        for &v in &targets {
            is_target[v as usize] = true;
        }
        dist[u as usize] = 0;
        touched.push(u);
        queue.push_back(u);
        'bfs: while let Some(x) = queue.pop_front() {
            let dx = dist[x as usize];
            for &y in h.neighbors(x) {
                if dist[y as usize] == UNREACHABLE {
                    dist[y as usize] = dx + 1;
                    touched.push(y);
                    queue.push_back(y);
                    if is_target[y as usize] && dx + 1 > 1 {
                        pending -= 1;
                        if pending == 0 {
                            break 'bfs;
                        }
                    }
                }
            }
        }
        for &v in &targets {
            let d = dist[v as usize];
            if d == UNREACHABLE {
                for &t in &touched {
                    dist[t as usize] = UNREACHABLE;
                }
                return Ok(StretchReport { max_stretch: None, witness_edge: Some((u, v)) });
            }
            if d > best {
                best = d;
                witness = Some((u, v));
            }
        }
        for &t in &touched {
            dist[t as usize] = UNREACHABLE;
        }
        touched.clear();
        queue.clear();
    }
    Ok(StretchReport { max_stretch: Some(best), witness_edge: witness })
}
