use super::{pair_index, L0Sketch, LinearSketch, SketchSeed};
use crate::graph::{Edge, UnweightedGraph, VertexId};

/// Signed edge-incidence convention: `+1` at the smaller endpoint, `-1` at
/// the larger, so the two endpoint rows of an internal edge cancel when a
/// cluster's rows are summed.
pub fn incidence_sign(v: VertexId, e: Edge) -> i64 {
    if v == e.0 {
        1
    } else if v == e.1 {
        -1
    } else {
        0
    }
}

/// ℓ0-sampler of vertex `v`'s signed incidence row over the pair space.
/// Summing these over a vertex set `S` yields a sampler of the edges leaving `S`.
pub fn neighborhood_sketch(g: &UnweightedGraph, v: VertexId, seed: SketchSeed) -> L0Sketch {
    let n = g.n();
    let mut sk = L0Sketch::new((n as u64 * n as u64).max(1), seed);
    for &w in g.neighbors(v) {
        let e = crate::graph::canonical(v, w);
        sk.update(pair_index(n, e.0, e.1), incidence_sign(v, e)).expect("pair index in range");
    }
    sk
}
