use super::{bfs_distances, UnweightedGraph, VertexId, WeightedGraph, UNREACHABLE};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Total weight of edges with exactly one endpoint in `s`.
pub fn cut_weight<T: Scalar>(g: &WeightedGraph<T>, s: &[VertexId]) -> T {
    let mut inside = vec![false; g.n()];
    for &v in s {
        inside[v as usize] = true;
    }
    g.edges()
        .filter(|&((u, v), _)| inside[u as usize] != inside[v as usize])
        .map(|(_, w)| w)
        .sum()
}

/// Per-layer comparison between `g` and a weighted subgraph `h`.
#[derive(Clone, Debug)]
pub struct LayerCutReport<T> {
    /// `layers[i]` holds the vertices at distance `i` in `unweight(h)`; the
    /// last layer also absorbs everything farther or unreachable.
    pub layers: Vec<Vec<VertexId>>,
    /// `w_g[i]` = weight in `g` between layers `i` and `i + 1`.
    pub w_g: Vec<T>,
    pub w_h: Vec<T>,
    /// Indices `i` where `W_i^G` leaves `W_i^H ± eps (W_{i-1}^H + W_i^H + W_{i+1}^H)`.
    pub violations: Vec<usize>,
}

impl<T> LayerCutReport<T> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Layer-cut diagnostic with depth `s` = the BFS eccentricity of `src` in
/// `unweight(h)`, plus one extra layer when some vertex is unreachable.
pub fn layer_cut_check<T: Scalar>(
    g: &UnweightedGraph,
    h: &WeightedGraph<T>,
    src: VertexId,
    eps: T,
) -> Result<LayerCutReport<T>> {
    let hu = h.unweighted();
    let dist = bfs_distances(&hu, src)?;
    let finite_max = dist.dist.iter().copied().filter(|&d| d != UNREACHABLE).max().unwrap_or(0);
    let depth = if dist.dist.contains(&UNREACHABLE) { finite_max + 1 } else { finite_max };
    layer_cut_check_to_depth(g, h, src, eps, depth)
}

/// Layer-cut diagnostic with an explicit last layer `A_s = {d >= s}`, as used
/// when studying a pair at distance `s`.
pub fn layer_cut_check_to_depth<T: Scalar>(
    g: &UnweightedGraph,
    h: &WeightedGraph<T>,
    src: VertexId,
    eps: T,
    depth: u32,
) -> Result<LayerCutReport<T>> {
    let hu = h.unweighted();
    hu.check_subgraph_of(g)?;
    if src as usize >= g.n() {
        return Err(Error::VertexOutOfRange { vertex: src as u64, n: g.n() });
    }
    let dist = bfs_distances(&hu, src)?;
    let s = depth as usize;
    let layer_of: Vec<usize> = dist.dist.iter().map(|&d| (d as usize).min(s)).collect();
    let mut layers = vec![Vec::new(); s + 1];
    for (v, &l) in layer_of.iter().enumerate() {
        layers[l].push(v as VertexId);
    }
    let mut w_g = vec![T::zero(); s];
    let mut w_h = vec![T::zero(); s];
    for (a, b) in g.edges() {
        let (la, lb) = (layer_of[a as usize], layer_of[b as usize]);
        if la.abs_diff(lb) == 1 {
            w_g[la.min(lb)] += T::one();
        }
    }
    for ((a, b), w) in h.edges() {
        let (la, lb) = (layer_of[a as usize], layer_of[b as usize]);
        if la.abs_diff(lb) == 1 {
            w_h[la.min(lb)] += w;
        }
    }
    let at = |v: &Vec<T>, i: isize| if i < 0 || i as usize >= v.len() { T::zero() } else { v[i as usize] };
    let violations = (0..s)
        .filter(|&i| {
            let ii = i as isize;
            let slack = eps * (at(&w_h, ii - 1) + at(&w_h, ii) + at(&w_h, ii + 1));
            let tol = T::lit(1e-9) * (T::one() + w_h[i]);
            (w_g[i] - w_h[i]).abs() > slack + tol
        })
        .collect();
    Ok(LayerCutReport { layers, w_g, w_h, violations })
}
