//! Instance generators: random graphs, dynamic streams with decoy churn, the
//! layered tightness instances and the planted-swap distribution.

use crate::error::{Error, Result};
use crate::graph::{canonical, Edge, UnweightedGraph, VertexId, WeightedGraph};
use crate::rng::{derive, rng};
use crate::stream::{StreamSource, UpdateEvent};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

/// Erdős–Rényi `G(n, p)`.
pub fn gnp(n: usize, p: f64, seed: u64) -> UnweightedGraph {
    assert!((0.0..=1.0).contains(&p), "edge probability must lie in [0, 1]");
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n as VertexId {
        for v in u + 1..n as VertexId {
            if r.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    UnweightedGraph::from_edges(n, edges).expect("generated pairs are valid")
}

pub fn cycle(n: usize) -> UnweightedGraph {
    UnweightedGraph::from_edges(n, (0..n as VertexId).map(|i| (i, (i + 1) % n as VertexId))).expect("n >= 3")
}

pub fn path(n: usize) -> UnweightedGraph {
    UnweightedGraph::from_edges(n, (1..n as VertexId).map(|i| (i - 1, i))).expect("valid path")
}

pub fn complete(n: usize) -> UnweightedGraph {
    let edges = (0..n as VertexId).flat_map(|u| (u + 1..n as VertexId).map(move |v| (u, v)));
    UnweightedGraph::from_edges(n, edges).expect("valid clique")
}

/// Star with center 0 and `leaves` leaves.
pub fn star(leaves: usize) -> UnweightedGraph {
    UnweightedGraph::from_edges(leaves + 1, (1..=leaves as VertexId).map(|i| (0, i))).expect("valid star")
}

/// Dynamic stream whose final graph is `g`. Besides one insertion per edge it
/// carries `round(deletion_ratio · |E|)` decoys, each an insert followed later
/// by a delete, all interleaved in a seeded random order. Decoys prefer
/// non-edges; on dense graphs the remainder reuses edges of `g` (inserted,
/// deleted, then inserted for good).
pub fn to_stream(g: &UnweightedGraph, deletion_ratio: f64, seed: u64) -> Result<StreamSource> {
    if !(0.0..1.0).contains(&deletion_ratio) {
        return Err(Error::Parameter(format!("deletion ratio {deletion_ratio} outside [0, 1)")));
    }
    let n = g.n();
    let decoys = (deletion_ratio * g.m() as f64).round() as usize;
    let mut r = rng(seed);
    let total_pairs = n * n.saturating_sub(1) / 2;
    let non_edges = total_pairs - g.m();
    let mut decoy_pairs: BTreeSet<Edge> = BTreeSet::new();
    let want_non = decoys.min(non_edges);
    if want_non * 2 > non_edges {
        let mut all: Vec<Edge> = (0..n as VertexId)
            .flat_map(|u| (u + 1..n as VertexId).map(move |v| (u, v)))
            .filter(|&(u, v)| !g.has_edge(u, v))
            .collect();
        all.shuffle(&mut r);
        decoy_pairs.extend(all.into_iter().take(want_non));
    } else {
        while decoy_pairs.len() < want_non {
            let u = r.gen_range(0..n as VertexId);
            let v = r.gen_range(0..n as VertexId);
            if u != v && !g.has_edge(u, v) {
                decoy_pairs.insert(canonical(u, v));
            }
        }
    }
    let mut edges: Vec<Edge> = g.edges().collect();
    edges.shuffle(&mut r);
    let reused: BTreeSet<Edge> = edges.iter().copied().take(decoys - want_non).collect();

    let mut timed: Vec<(f64, usize, UpdateEvent)> = Vec::new();
    let mut push = |t: f64, ev: UpdateEvent| {
        let k = timed.len();
        timed.push((t, k, ev));
    };
    for &(u, v) in &decoy_pairs {
        let (a, b) = (r.gen::<f64>(), r.gen::<f64>());
        push(a.min(b), UpdateEvent::insert(u, v));
        push(a.max(b), UpdateEvent::delete(u, v));
    }
    for (u, v) in g.edges() {
        if reused.contains(&(u, v)) {
            let mut ts = [r.gen::<f64>(), r.gen::<f64>(), r.gen::<f64>()];
            ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            push(ts[0], UpdateEvent::insert(u, v));
            push(ts[1], UpdateEvent::delete(u, v));
            push(ts[2], UpdateEvent::insert(u, v));
        } else {
            push(r.gen::<f64>(), UpdateEvent::insert(u, v));
        }
    }
    timed.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
    StreamSource::new(n, timed.into_iter().map(|(_, _, ev)| ev).collect())
}

/// Layers `V_1..V_N` of width `a` between endpoints `u` and `v`, complete
/// bipartite between consecutive layers, plus the edge `e = (u, v)`.
#[derive(Clone, Debug)]
pub struct LayeredInstance {
    pub a: usize,
    pub layers: usize,
    pub u: VertexId,
    pub v: VertexId,
    pub graph: UnweightedGraph,
}

impl LayeredInstance {
    /// Vertex `j` of layer `i` (1-based layers).
    pub fn vertex(&self, i: usize, j: usize) -> VertexId {
        (1 + (i - 1) * self.a + j) as VertexId
    }

    pub fn e(&self) -> Edge {
        (self.u, self.v)
    }

    /// Closed form `(2a + N - 1) / (a² + 2a + N - 1)` for `R_e`.
    pub fn resistance_closed_form(&self) -> f64 {
        let (a, n) = (self.a as f64, self.layers as f64);
        (2.0 * a + n - 1.0) / (a * a + 2.0 * a + n - 1.0)
    }

    /// `2a + (N - 1)a² + 1`.
    pub fn expected_edge_count(&self) -> usize {
        2 * self.a + (self.layers - 1) * self.a * self.a + 1
    }

    /// Cut sparsifier that drops `e`: every other edge is scaled by
    /// `1 + 1/(2a)`. Cuts not separating `u` from `v` shrink by that factor;
    /// separating cuts lose the unit of `e` out of at least `a`. Both stay
    /// within `1 ± eps` for the returned `eps = 1/(2a)`.
    pub fn cut_sparsifier_without_e(&self) -> (WeightedGraph<f64>, f64) {
        let f = 1.0 + 1.0 / (2.0 * self.a as f64);
        let h = WeightedGraph::from_edges(
            self.graph.n(),
            self.graph.edges().filter(|&e| e != self.e()).map(|(x, y)| (x, y, f)),
        )
        .expect("subgraph of a valid graph");
        (h, 1.0 / (2.0 * self.a as f64))
    }
}

/// Layered instance with explicit width and layer count.
pub fn layered_custom(a: usize, layers: usize) -> Result<LayeredInstance> {
    if a < 2 || layers < 2 {
        return Err(Error::Parameter(format!("layered instance needs a >= 2 and N >= 2, got a = {a}, N = {layers}")));
    }
    let nv = 2 + a * layers;
    let u: VertexId = 0;
    let v = (nv - 1) as VertexId;
    let at = |i: usize, j: usize| (1 + (i - 1) * a + j) as VertexId;
    let mut edges = vec![(u, v)];
    for j in 0..a {
        edges.push((u, at(1, j)));
        edges.push((at(layers, j), v));
    }
    for i in 1..layers {
        for j in 0..a {
            for k in 0..a {
                edges.push((at(i, j), at(i + 1, k)));
            }
        }
    }
    let graph = UnweightedGraph::from_edges(nv, edges)?;
    Ok(LayeredInstance { a, layers, u, v, graph })
}

/// Asymptotic parameters `a = ⌈c n^{1/3}⌉`, `N = ⌈n^{2/3} / c⌉`, `c = log2 n`.
pub fn layered_instance(n: usize) -> Result<LayeredInstance> {
    if n < 2 {
        return Err(Error::Parameter(format!("layered instance needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let c = nf.log2();
    let a = (c * nf.cbrt()).ceil() as usize;
    let layers = (nf.powf(2.0 / 3.0) / c).ceil() as usize;
    layered_custom(a, layers)
}

/// Thin, long variant: `a = ⌈log2 n⌉`, `N = ⌈n / a⌉`.
pub fn cut_bad_instance(n: usize) -> Result<LayeredInstance> {
    if n < 2 {
        return Err(Error::Parameter(format!("cut-bad instance needs n >= 2, got {n}")));
    }
    let a = (n as f64).log2().ceil() as usize;
    layered_custom(a, n.div_ceil(a))
}

/// Sample from the planted-swap distribution.
#[derive(Clone, Debug)]
pub struct HardInstance {
    pub graph: UnweightedGraph,
    /// Vertex at circular position `i`.
    pub positions: Vec<VertexId>,
    /// `(a, b, c, d)`: edges `(a, b)` and `(c, d)` were replaced by `(a, c)`
    /// and `(b, d)`.
    pub planted: (VertexId, VertexId, VertexId, VertexId),
    /// Seed that produced the instance after any retries.
    pub seed_used: u64,
}

/// Random circular band graph with one planted swap.
pub fn conjectured_hard(n: usize, d: usize, seed: u64) -> Result<HardInstance> {
    if !(d > 1 && 4 * d < n) {
        return Err(Error::Parameter(format!("need 1 < d < n/4, got n = {n}, d = {d}")));
    }
    let mut last = String::new();
    for attempt in 0..=3u64 {
        let s = if attempt == 0 { seed } else { derive(seed, attempt) };
        match planted_attempt(n, d, s) {
            Ok(inst) => return Ok(inst),
            Err(msg) => last = msg,
        }
    }
    Err(Error::Generation(format!("planted swap failed after 4 seeds: {last}")))
}

fn planted_attempt(n: usize, d: usize, seed: u64) -> std::result::Result<HardInstance, String> {
    let mut r = rng(seed);
    let mut positions: Vec<VertexId> = (0..n as VertexId).collect();
    positions.shuffle(&mut r);
    let mut set: BTreeSet<Edge> = BTreeSet::new();
    for i in 0..n {
        for off in 1..=d {
            let j = (i + off) % n;
            if r.gen_bool(0.5) {
                set.insert(canonical(positions[i], positions[j]));
            }
        }
    }
    if set.len() < 2 {
        return Err("fewer than two edges to swap".into());
    }
    let list: Vec<Edge> = set.iter().copied().collect();
    for _ in 0..100 {
        let i = r.gen_range(0..list.len());
        let mut j = r.gen_range(0..list.len() - 1);
        if j >= i {
            j += 1;
        }
        let (mut a, mut b) = list[i];
        let (mut c, mut dd) = list[j];
        if r.gen_bool(0.5) {
            std::mem::swap(&mut a, &mut b);
        }
        if r.gen_bool(0.5) {
            std::mem::swap(&mut c, &mut dd);
        }
        let distinct = [a, b, c, dd].iter().collect::<BTreeSet<_>>().len() == 4;
        if !distinct || set.contains(&canonical(a, c)) || set.contains(&canonical(b, dd)) {
            continue;
        }
        set.remove(&canonical(a, b));
        set.remove(&canonical(c, dd));
        set.insert(canonical(a, c));
        set.insert(canonical(b, dd));
        let graph = UnweightedGraph::from_edges(n, set).map_err(|e| e.to_string())?;
        return Ok(HardInstance { graph, positions, planted: (a, b, c, dd), seed_used: seed });
    }
    Err("no valid swap in 100 draws".into())
}
