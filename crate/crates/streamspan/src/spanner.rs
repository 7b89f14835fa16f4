//! Single-pass spanners: the unweighted spectral sparsifier, the subset-cover
//! space/stretch tradeoff, and the sparse-graph tradeoff.

use crate::error::{Error, Result};
use crate::graph::{Edge, UnweightedGraph, VertexId};
use crate::report::{Metering, RegressionStore, RunParams, RunReport, Shape};
use crate::rng::{derive, derive_str, rng};
use crate::sketch::{pair_from_index, pair_index, LinearSketch, SketchSeed, SparseDecode, SparseRecoverySketch};
use crate::sparsify::{spectral_sparsify, SparsifierParams};
use crate::stream::{StreamEngine, StreamSource, UpdateEvent};
use rand::seq::index::sample;
use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

/// Spanner plus its metered report. `witness` maps each edge of the input to
/// the sub-run (subset index) responsible for it, where applicable.
#[derive(Clone, Debug)]
pub struct SpannerOutput {
    pub spanner: UnweightedGraph,
    pub report: RunReport,
    pub witness: BTreeMap<Edge, usize>,
}

/// Live edge set held by a black-box sparsifier during a pass.
#[derive(Default)]
struct LiveEdges(BTreeSet<Edge>);

impl LiveEdges {
    fn apply(&mut self, ev: &UpdateEvent) {
        if ev.delta() > 0 {
            self.0.insert(ev.edge);
        } else {
            self.0.remove(&ev.edge);
        }
    }
}

/// Unweighted sparsifier of the subgraph induced by `verts` (sorted), run
/// on compact local ids so its `log n` factor is `log |verts|`.
pub(crate) fn sparsify_on(verts: &[VertexId], edges: &BTreeSet<Edge>, params: &SparsifierParams) -> Vec<Edge> {
    let local = |x: VertexId| verts.binary_search(&x).expect("edge inside subset") as VertexId;
    let g = UnweightedGraph::from_edges(verts.len(), edges.iter().map(|&(u, v)| (local(u), local(v))))
        .expect("relabelled edges are valid");
    spectral_sparsify::<f64>(&g, params)
        .edges()
        .map(|((a, b), _)| (verts[a as usize], verts[b as usize]))
        .collect()
}

fn stretch_shape(n: usize, m: usize, alpha: f64) -> Shape {
    Shape { n: n as f64, m: m as f64, alpha, ..Default::default() }
}

/// One pass; the output is the unweighted ER sparsifier of the final graph
/// at `params.eps`. The sparsifier is charged `⌈C ε⁻² n log n⌉` words.
pub fn sparsifier_spanner(src: &StreamSource, params: &SparsifierParams) -> Result<SpannerOutput> {
    let start = Instant::now();
    let engine = StreamEngine::new(src);
    let mut live = LiveEdges::default();
    engine.run_pass(|ev| {
        live.apply(ev);
        Ok(())
    })?;
    engine.checkpoint(params.charged_words(src.n()));
    let verts: Vec<VertexId> = (0..src.n() as VertexId).collect();
    let spanner = UnweightedGraph::from_edges(src.n(), sparsify_on(&verts, &live.0, params))?;

    let g = src.materialize();
    let mut report = RunReport::new("sparsifier", RunParams { seed: params.seed, ..Default::default() }, &g);
    report.passes = engine.passes();
    report.peak_words = engine.peak_words();
    report.metering = Metering::Charged;
    report.note("eps", params.eps);
    let bound = RegressionStore::builtin().expect("any", "sparsifier", "stretch").bound(&stretch_shape(g.n(), g.m(), 0.0));
    report.certify(&g, &spanner, Some(bound))?;
    report.wall_ms = start.elapsed().as_millis() as u64;
    Ok(SpannerOutput { spanner, report, witness: BTreeMap::new() })
}

/// Family of vertex subsets covering every pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetCover {
    pub n: usize,
    /// Sorted member lists.
    pub sets: Vec<Vec<VertexId>>,
    pub seed: u64,
    /// Construction attempts used (1 on first-try coverage).
    pub attempts: u32,
}

/// Coverage retries before giving up.
pub const COVER_RETRIES: u32 = 8;

/// Exhaustive pair checks up to this `n`; sampled above.
pub const COVER_EXHAUSTIVE_LIMIT: usize = 500;

/// Sampled pairs for coverage checks above the exhaustive limit.
pub const COVER_SAMPLED_PAIRS: usize = 100_000;

impl SubsetCover {
    /// Subset ids containing each vertex, ascending.
    pub fn membership(&self) -> Vec<Vec<u32>> {
        let mut m = vec![Vec::new(); self.n];
        for (i, s) in self.sets.iter().enumerate() {
            for &v in s {
                m[v as usize].push(i as u32);
            }
        }
        m
    }

    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// First subset containing both `u` and `v`.
    pub fn covering_set(&self, u: VertexId, v: VertexId) -> Option<usize> {
        self.sets.iter().position(|s| s.binary_search(&u).is_ok() && s.binary_search(&v).is_ok())
    }

    /// Exhaustive for `n ≤ 500`, otherwise `10⁵` sampled pairs.
    pub fn covers_all_pairs(&self, check_seed: u64) -> bool {
        let n = self.n;
        if n < 2 {
            return true;
        }
        if n <= COVER_EXHAUSTIVE_LIMIT {
            let mut seen = vec![false; n * n];
            for s in &self.sets {
                for (i, &a) in s.iter().enumerate() {
                    for &b in &s[i + 1..] {
                        seen[a as usize * n + b as usize] = true;
                    }
                }
            }
            (0..n).all(|a| (a + 1..n).all(|b| seen[a * n + b]))
        } else {
            let member = self.membership();
            let mut r = rng(check_seed);
            (0..COVER_SAMPLED_PAIRS).all(|_| {
                let a = r.gen_range(0..n);
                let mut b = r.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                intersects(&member[a], &member[b])
            })
        }
    }
}

fn intersects(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

fn intersection(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

/// `⌈8 n^{2α} ln n⌉` uniform subsets of size `⌈2 n^{1-α}⌉`, redrawn until every
/// pair is covered. When the subset size reaches `n` the cover is `{[n]}`.
pub fn build_subset_cover(n: usize, alpha: f64, seed: u64) -> Result<SubsetCover> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    let nf = n as f64;
    let size = (2.0 * nf.powf(1.0 - alpha)).ceil() as usize;
    if n < 2 || size >= n {
        return Ok(SubsetCover { n, sets: vec![(0..n as VertexId).collect()], seed, attempts: 1 });
    }
    let count = (8.0 * nf.powf(2.0 * alpha) * nf.ln()).ceil() as usize;
    for attempt in 0..COVER_RETRIES {
        let s = derive(seed, attempt as u64);
        let mut r = rng(s);
        let sets: Vec<Vec<VertexId>> = (0..count)
            .map(|_| {
                let mut v: Vec<VertexId> = sample(&mut r, n, size).into_iter().map(|x| x as VertexId).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let cover = SubsetCover { n, sets, seed, attempts: attempt + 1 };
        if cover.covers_all_pairs(derive(s, 0xc0)) {
            return Ok(cover);
        }
    }
    Err(Error::Generation(format!("subset cover for n = {n}, alpha = {alpha} failed {COVER_RETRIES} times")))
}

/// Feeds every event to each sub-run whose subset holds both endpoints and
/// returns the final per-subset edge sets.
fn route_pass(engine: &StreamEngine, member: &[Vec<u32>], runs: usize, mut extra: impl FnMut(&UpdateEvent) -> Result<()>) -> Result<Vec<LiveEdges>> {
    let mut live: Vec<LiveEdges> = (0..runs).map(|_| LiveEdges::default()).collect();
    let mut shared = Vec::new();
    engine.run_pass(|ev| {
        let (u, v) = ev.edge;
        intersection(&member[u as usize], &member[v as usize], &mut shared);
        for &i in &shared {
            live[i as usize].apply(ev);
        }
        extra(ev)
    })?;
    Ok(live)
}

fn witness_map(g: &UnweightedGraph, member: &[Vec<u32>]) -> BTreeMap<Edge, usize> {
    let mut shared = Vec::new();
    g.edges()
        .filter_map(|(u, v)| {
            intersection(&member[u as usize], &member[v as usize], &mut shared);
            shared.first().map(|&i| ((u, v), i as usize))
        })
        .collect()
}

/// Union over a subset cover of per-subset sparsifier spanners, all fed in
/// one pass.
pub fn tradeoff_spanner(src: &StreamSource, alpha: f64, params: &SparsifierParams) -> Result<SpannerOutput> {
    let start = Instant::now();
    let n = src.n();
    let cover = build_subset_cover(n, alpha, derive_str(params.seed, "cover"))?;
    let member = cover.membership();
    let engine = StreamEngine::new(src);
    let live = route_pass(&engine, &member, cover.sets.len(), |_| Ok(()))?;
    let charged: u64 = cover.sets.iter().map(|s| params.charged_words(s.len())).sum();
    engine.checkpoint(charged);

    let mut edges = BTreeSet::new();
    for (i, (set, run)) in cover.sets.iter().zip(&live).enumerate() {
        let p = SparsifierParams { seed: derive(params.seed, i as u64), ..*params };
        edges.extend(sparsify_on(set, &run.0, &p));
    }
    let spanner = UnweightedGraph::from_edges(n, edges)?;

    let g = src.materialize();
    let mut report = RunReport::new("tradeoff", RunParams { alpha: Some(alpha), seed: params.seed, ..Default::default() }, &g);
    report.passes = engine.passes();
    report.peak_words = engine.peak_words();
    report.metering = Metering::Charged;
    report.note("subsets", cover.sets.len());
    report.note("max_subset_size", cover.max_set_size());
    report.note("cover_attempts", cover.attempts);
    let bound = RegressionStore::builtin().expect("any", "tradeoff", "stretch").bound(&stretch_shape(n, g.m(), alpha));
    report.certify(&g, &spanner, Some(bound))?;
    report.wall_ms = start.elapsed().as_millis() as u64;
    Ok(SpannerOutput { witness: witness_map(&g, &member), spanner, report })
}

/// Both branches of the sparse-graph tradeoff in one pass: a sparse-recovery
/// sketch with budget `⌈n^{1+α}⌉` over the pair space, and `⌈8 p⁻² ln n⌉`
/// random subsets with inclusion probability `p = n^{-α}`, each sparsified.
/// The output is the union; when recovery succeeds it is the whole graph.
pub fn sparse_tradeoff_spanner(src: &StreamSource, alpha: f64, params: &SparsifierParams) -> Result<SpannerOutput> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    let start = Instant::now();
    let n = src.n();
    let nf = n.max(2) as f64;
    let p = nf.powf(-alpha);
    let count = (8.0 / (p * p) * nf.ln()).ceil() as usize;
    let mut r = rng(derive_str(params.seed, "sparse-subsets"));
    let sets: Vec<Vec<VertexId>> =
        (0..count).map(|_| (0..n as VertexId).filter(|_| r.gen::<f64>() < p).collect()).collect();
    let mut member = vec![Vec::new(); n];
    for (i, s) in sets.iter().enumerate() {
        for &v in s {
            member[v as usize].push(i as u32);
        }
    }

    let budget = nf.powf(1.0 + alpha).ceil() as u64;
    let dim = (n as u64 * n as u64).max(1);
    let mut recovery = SparseRecoverySketch::new(dim, budget, SketchSeed::new(derive_str(params.seed, "sparse-recovery")));
    let engine = StreamEngine::new(src);
    let live = route_pass(&engine, &member, sets.len(), |ev| recovery.update(pair_index(n, ev.edge.0, ev.edge.1), ev.delta()))?;
    let charged: u64 = sets.iter().map(|s| params.charged_words(s.len())).sum();
    engine.checkpoint(charged + recovery.words());

    let mut edges = BTreeSet::new();
    let recovered = match recovery.decode() {
        SparseDecode::Exact(v) => {
            edges.extend(v.into_iter().map(|(i, _)| pair_from_index(n, i)));
            true
        }
        SparseDecode::Overflow => false,
    };
    for (i, (set, run)) in sets.iter().zip(&live).enumerate() {
        let sp = SparsifierParams { seed: derive(params.seed, i as u64), ..*params };
        edges.extend(sparsify_on(set, &run.0, &sp));
    }
    let spanner = UnweightedGraph::from_edges(n, edges)?;

    let g = src.materialize();
    spanner.check_subgraph_of(&g)?;
    let mut report =
        RunReport::new("sparse_tradeoff", RunParams { alpha: Some(alpha), seed: params.seed, ..Default::default() }, &g);
    report.passes = engine.passes();
    report.peak_words = engine.peak_words();
    report.metering = Metering::Mixed;
    report.note("subsets", sets.len());
    report.note("recovery_budget", budget);
    report.note("recovered_whole_graph", recovered);
    let bound = if recovered {
        1.0
    } else {
        RegressionStore::builtin().expect("any", "sparse_tradeoff", "stretch").bound(&stretch_shape(n, g.m(), alpha)).max(1.0)
    };
    report.certify(&g, &spanner, Some(bound))?;
    report.wall_ms = start.elapsed().as_millis() as u64;
    Ok(SpannerOutput { witness: witness_map(&g, &member), spanner, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gnp, path, to_stream};

    #[test]
    fn tree_stream_returns_the_tree() {
        let g = path(40);
        let out = sparsifier_spanner(&to_stream(&g, 0.3, 1).unwrap(), &SparsifierParams::with_seed(2)).unwrap();
        assert_eq!(out.spanner, g);
        assert_eq!(out.report.max_stretch, Some(1));
        assert_eq!(out.report.passes, 1);
    }

    #[test]
    fn netting_stream_gives_single_edge() {
        use crate::stream::UpdateEvent as E;
        let src = StreamSource::new(4, vec![E::insert(0, 1), E::insert(2, 3), E::delete(2, 3), E::insert(1, 2), E::delete(1, 2)]).unwrap();
        let out = sparsifier_spanner(&src, &SparsifierParams::default()).unwrap();
        assert_eq!(out.spanner.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn cover_degenerates_to_whole_set() {
        let c = build_subset_cover(50, 0.05, 1).unwrap();
        assert_eq!(c.sets, vec![(0..50).collect::<Vec<_>>()]);
    }

    #[test]
    fn cover_n100_half() {
        let c = build_subset_cover(100, 0.5, 7).unwrap();
        assert!(c.max_set_size() <= 20);
        assert!(c.sets.len() as f64 <= 8.0 * 100.0 * 100f64.ln() + 1.0);
        assert!(c.covers_all_pairs(0));
        assert_eq!(c, build_subset_cover(100, 0.5, 7).unwrap());
    }

    #[test]
    fn tradeoff_witnesses_contain_endpoints() {
        let g = gnp(60, 0.15, 4);
        let out = tradeoff_spanner(&to_stream(&g, 0.2, 5).unwrap(), 0.4, &SparsifierParams::with_seed(6)).unwrap();
        assert_eq!(out.report.passes, 1);
        assert!(out.spanner.is_subgraph_of(&g));
        assert_eq!(out.witness.len(), g.m());
        assert!(out.report.max_stretch.is_some());
    }

    #[test]
    fn sparse_branch_recovers_small_graphs() {
        let g = gnp(80, 0.05, 8);
        let out = sparse_tradeoff_spanner(&to_stream(&g, 0.5, 9).unwrap(), 0.5, &SparsifierParams::with_seed(1)).unwrap();
        assert_eq!(out.spanner, g);
        assert_eq!(out.report.extra["recovered_whole_graph"], serde_json::json!(true));
    }
}
