//! Multi-pass spanners from clusterings.
//!
//! Two clustering procedures run over a [`SuperGraphView`]: a Baswana–Sen
//! style one that grows clusters one hop per pass, and a Kapralov–Woodruff
//! style one that builds every level from a single pass of mergeable
//! samplers. Recursing on the contracted graph trades passes for stretch.
//!
//! All sketches address base vertex pairs, so any edge recovered between
//! two super-vertices is already a representative edge of the base graph.
//!
//! Passes are scheduled by a small driver. Each clustering is a [`Stage`]
//! that needs some number of passes and exposes its partition after a known
//! pass; the next stage starts on the contracted view in the same physical
//! pass as the previous stage's last one.

use crate::error::{Error, Result};
use crate::graph::{bfs_limited, canonical, Edge, UnweightedGraph, VertexId};
use crate::report::{Metering, RunParams, RunReport};
use crate::rng::{derive, derive_str, rng};
use crate::sketch::{
    pair_from_index, pair_index, EdgeProbe, EdgeProbeMode, EdgeProbeSketch, L0Outcome, L0Sketch, LinearSketch,
    SketchSeed, SparseDecode, SparseRecoverySketch, SubsetOutcome, SubsetSketch,
};
use crate::spanner::SpannerOutput;
use crate::stream::{StreamEngine, StreamSource, UpdateEvent};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;
use std::time::Instant;

/// Retries after the first attempt before a run gives up.
pub const MAX_RETRIES: u32 = 3;

/// Oversampling constant in the per-cluster neighbor budgets.
const BUDGET_FACTOR: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Kw,
    Bs,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Kw => "kw",
            Scheme::Bs => "bs",
        }
    }
}

// ---------------------------------------------------------------------------
// Recursion arithmetic

const DENOM_LIMIT: i64 = 1000;
const GUARD: f64 = 1e-12;

/// `k` as an exact fraction with denominator at most 1000, if it is one.
fn as_ratio(k: f64) -> Option<BigRational> {
    (1..=DENOM_LIMIT).find_map(|b| {
        let a = (k * b as f64).round();
        ((k - a / b as f64).abs() < GUARD && a.abs() < 1e15)
            .then(|| BigRational::new(BigInt::from(a as i64), BigInt::from(b)))
    })
}

/// `⌈((k + 1) / 2)^{1/g}⌉`, exact when `k` is a small-denominator rational.
fn ceil_root(k: f64, g: u32) -> u64 {
    let approx = ((k + 1.0) / 2.0).powf(1.0 / g as f64);
    match as_ratio(k) {
        Some(kr) => {
            let x = (kr + BigRational::one()) / BigRational::from_integer(BigInt::from(2));
            let mut c = (approx.floor() as u64).saturating_sub(1).max(1);
            while BigRational::from_integer(BigInt::from(c).pow(g)) < x {
                c += 1;
            }
            c
        }
        None => {
            let near = approx.round();
            if (approx - near).abs() < GUARD {
                near as u64
            } else {
                approx.ceil() as u64
            }
        }
    }
}

/// Parameters of the recursive scheme: `r = c - 1` clustering steps per
/// iteration with `c = ⌈((k+1)/2)^{1/g}⌉`, and iteration `i` sampling at
/// `p_i = n^{-d_i}`, `d_i = (r+1)^{i-1} / k`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursionParams {
    pub k: f64,
    pub g: u32,
    pub r: u64,
    k_exact: Option<BigRational>,
}

impl RecursionParams {
    pub fn new(k: f64, g: u32) -> Result<Self> {
        if !(k.is_finite() && k >= 1.0) {
            return Err(Error::Parameter(format!("k must be a finite number >= 1, got {k}")));
        }
        let log_k = k.log2();
        let near = log_k.round();
        let max_g = if (log_k - near).abs() < GUARD { near } else { log_k.ceil() } as u32;
        if g < 1 || g > max_g {
            return Err(Error::Parameter(format!("g must lie in [1, ceil(log2 k)] = [1, {max_g}], got {g}")));
        }
        let r = ceil_root(k, g) - 1;
        Ok(RecursionParams { k, g, r, k_exact: as_ratio(k) })
    }

    pub fn c(&self) -> u64 {
        self.r + 1
    }

    /// `d_i` as an exact fraction when `k` has one.
    pub fn d_exact(&self, i: u32) -> Option<BigRational> {
        let k = self.k_exact.as_ref()?;
        let num = BigRational::from_integer(BigInt::from(self.c()).pow(i.saturating_sub(1)));
        Some(num / k)
    }

    pub fn d(&self, i: u32) -> f64 {
        match self.d_exact(i) {
            Some(d) => d.to_f64().unwrap_or(f64::INFINITY),
            None => (self.c() as f64).powi(i as i32 - 1) / self.k,
        }
    }

    /// Center sampling probability of iteration `i`.
    pub fn p(&self, i: u32, n: usize) -> f64 {
        (n.max(1) as f64).powf(-self.d(i))
    }

    /// Per-iteration cluster diameter growth `α`.
    pub fn alpha(&self, scheme: Scheme) -> u128 {
        match scheme {
            Scheme::Kw => (1u128 << (self.r + 1)) - 2,
            Scheme::Bs => 2 * self.r as u128,
        }
    }

    pub fn stretch_bound(&self, scheme: Scheme) -> Result<u128> {
        let c = self.c() as u32;
        let base: u128 = match scheme {
            Scheme::Kw => 1u128.checked_shl(c).map(|x| x - 1),
            Scheme::Bs => Some(2 * c as u128 - 1),
        }
        .ok_or_else(|| Error::Parameter("stretch bound overflows".into()))?;
        base.checked_pow(self.g)
            .and_then(|x| x.checked_mul(2))
            .map(|x| x - 1)
            .ok_or_else(|| Error::Parameter("stretch bound overflows".into()))
    }

    pub fn pass_bound(&self, scheme: Scheme) -> u64 {
        match scheme {
            Scheme::Kw => self.g as u64 + 1,
            Scheme::Bs => self.g as u64 * self.r + 1,
        }
    }

    /// Largest admissible `|P_g|²`: four times the square of its expectation.
    pub fn cluster_pair_budget(&self, n: usize) -> f64 {
        let e = 1.0 + 1.0 / self.k - self.d(self.g + 1);
        4.0 * (n.max(1) as f64).powf(2.0 * e)
    }
}

pub fn stretch_bound(k: f64, g: u32, scheme: Scheme) -> Result<u128> {
    RecursionParams::new(k, g)?.stretch_bound(scheme)
}

pub fn pass_bound(k: f64, g: u32, scheme: Scheme) -> Result<u64> {
    Ok(RecursionParams::new(k, g)?.pass_bound(scheme))
}

// ---------------------------------------------------------------------------
// Partitions and views

/// One cluster: its center and members, both as super-vertex ids of the
/// view it was built on, plus the underlying base vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub center: u32,
    pub supers: Vec<u32>,
    pub members: Vec<VertexId>,
}

/// Disjoint clusters covering part of the vertex set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialPartition {
    pub clusters: Vec<Cluster>,
}

impl PartialPartition {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Cluster index of each base vertex.
    pub fn assignment(&self, n: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; n];
        for (i, c) in self.clusters.iter().enumerate() {
            for &v in &c.members {
                out[v as usize] = Some(i);
            }
        }
        out
    }

    /// True if no base vertex lies in two clusters.
    pub fn is_disjoint(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.clusters.iter().flat_map(|c| &c.members).all(|&v| seen.insert(v))
    }

    /// Largest pairwise distance in `h` between members of one cluster;
    /// `None` if some cluster is disconnected in `h`.
    pub fn max_diameter(&self, h: &UnweightedGraph) -> Option<u32> {
        let mut worst = 0;
        for c in &self.clusters {
            worst = worst.max(cluster_diameter(h, &c.members)?);
        }
        Some(worst)
    }
}

/// Largest distance in `h` between two of `members`.
pub fn cluster_diameter(h: &UnweightedGraph, members: &[VertexId]) -> Option<u32> {
    let mut worst = 0;
    for &x in members {
        let d = bfs_limited(h, x, u32::MAX - 1).ok()?;
        for &y in members {
            worst = worst.max(d.get(y)?);
        }
    }
    Some(worst)
}

/// True if every edge of `g` with an endpoint outside the partition has
/// its endpoints within `bound` hops in `h`.
pub fn outside_edges_within(g: &UnweightedGraph, h: &UnweightedGraph, p: &PartialPartition, bound: u32) -> bool {
    let at = p.assignment(g.n());
    let mut by_source: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for (x, y) in g.edges() {
        if at[x as usize].is_none() || at[y as usize].is_none() {
            by_source.entry(x).or_default().push(y);
        }
    }
    by_source.into_iter().all(|(x, ys)| {
        let d = bfs_limited(h, x, bound).expect("vertex in range");
        ys.iter().all(|&y| d.get(y).is_some_and(|t| t <= bound))
    })
}

/// The graph obtained by contracting clusters: super-vertices are sets of
/// base vertices; base vertices outside every cluster are dropped, and so
/// are edges inside one super-vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperGraphView {
    n: usize,
    map: Vec<Option<u32>>,
    members: Vec<Vec<VertexId>>,
}

impl SuperGraphView {
    pub fn identity(n: usize) -> Self {
        SuperGraphView {
            n,
            map: (0..n as u32).map(Some).collect(),
            members: (0..n as VertexId).map(|v| vec![v]).collect(),
        }
    }

    /// Contracts each cluster of `p` (built on this view) to one super-vertex.
    pub fn contract(&self, p: &PartialPartition) -> Self {
        let mut map = vec![None; self.n];
        let mut members = Vec::with_capacity(p.len());
        for (i, c) in p.clusters.iter().enumerate() {
            let mut m: Vec<VertexId> = c.supers.iter().flat_map(|&s| self.members[s as usize].iter().copied()).collect();
            m.sort_unstable();
            for &v in &m {
                map[v as usize] = Some(i as u32);
            }
            members.push(m);
        }
        SuperGraphView { n: self.n, map, members }
    }

    pub fn base_n(&self) -> usize {
        self.n
    }

    pub fn super_count(&self) -> usize {
        self.members.len()
    }

    pub fn super_of(&self, v: VertexId) -> Option<u32> {
        self.map[v as usize]
    }

    pub fn members(&self, s: u32) -> &[VertexId] {
        &self.members[s as usize]
    }

    /// Super-vertex endpoints of a base edge, if it survives contraction.
    pub fn translate(&self, (x, y): Edge) -> Option<(u32, u32)> {
        let (a, b) = (self.map[x as usize]?, self.map[y as usize]?);
        (a != b).then_some((a, b))
    }

    fn base_members(&self, supers: &[u32]) -> Vec<VertexId> {
        let mut m: Vec<VertexId> = supers.iter().flat_map(|&s| self.members[s as usize].iter().copied()).collect();
        m.sort_unstable();
        m
    }

    fn partition_from(&self, groups: BTreeMap<u32, Vec<u32>>) -> PartialPartition {
        PartialPartition {
            clusters: groups
                .into_iter()
                .map(|(center, mut supers)| {
                    supers.sort_unstable();
                    let members = self.base_members(&supers);
                    Cluster { center, supers, members }
                })
                .collect(),
        }
    }
}

/// Nested center sets `N_0 = all ⊇ N_1 ⊇ … ⊇ N_levels`, each member of
/// `N_{j-1}` kept in `N_j` with probability `p`.
fn nested_centers(count: usize, p: f64, levels: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut r = rng(seed);
    let mut out = vec![vec![true; count]];
    for j in 1..=levels {
        let row = (0..count).map(|s| r.gen::<f64>() < p && out[j - 1][s]).collect();
        out.push(row);
    }
    out
}

fn ln_n(n: usize) -> f64 {
    (n.max(2) as f64).ln()
}

fn budget(mult: f64, n: usize, cap: usize) -> u64 {
    ((BUDGET_FACTOR * mult * ln_n(n)).ceil() as u64).min(cap as u64).max(1)
}

fn failure(msg: impl Into<String>) -> Error {
    Error::SketchFailure(msg.into())
}

// ---------------------------------------------------------------------------
// Stages and the pass driver

trait Stage {
    fn passes(&self) -> usize;
    /// Number of own passes after which [`Stage::partition`] is final.
    fn ready_after(&self) -> usize;
    fn begin_pass(&mut self, idx: usize) -> Result<()>;
    fn feed(&mut self, ev: &UpdateEvent) -> Result<()>;
    /// Closes a pass, returning the words its sketches held.
    fn end_pass(&mut self, idx: usize) -> Result<u64>;
    fn partition(&self) -> Option<PartialPartition>;
    fn view(&self) -> &Rc<SuperGraphView>;
    fn edges(&self) -> &BTreeSet<Edge>;
}

struct Active {
    stage: Box<dyn Stage>,
    done: usize,
    advanced: bool,
}

/// Runs stages over `engine`, fusing the passes of overlapping stages.
/// `next` receives each partition as soon as it is final and may return the
/// stage to run on it.
fn drive<F>(engine: &StreamEngine, first: Box<dyn Stage>, mut next: F) -> Result<BTreeSet<Edge>>
where
    F: FnMut(PartialPartition, &Rc<SuperGraphView>) -> Result<Option<Box<dyn Stage>>>,
{
    let mut active = vec![Active { stage: first, done: 0, advanced: false }];
    let mut edges = BTreeSet::new();
    loop {
        let mut i = 0;
        while i < active.len() {
            let a = &mut active[i];
            if !a.advanced && a.done >= a.stage.ready_after() {
                a.advanced = true;
                if let Some(p) = a.stage.partition() {
                    let view = a.stage.view().clone();
                    if let Some(s) = next(p, &view)? {
                        active.push(Active { stage: s, done: 0, advanced: false });
                    }
                }
            }
            i += 1;
        }
        let mut kept = Vec::with_capacity(active.len());
        for a in active.drain(..) {
            if a.advanced && a.done >= a.stage.passes() {
                edges.extend(a.stage.edges().iter().copied());
            } else {
                kept.push(a);
            }
        }
        active = kept;
        if active.is_empty() {
            return Ok(edges);
        }

        for a in active.iter_mut().filter(|a| a.done < a.stage.passes()) {
            a.stage.begin_pass(a.done)?;
        }
        {
            let mut feeders: Vec<Box<dyn FnMut(&UpdateEvent) -> Result<()> + '_>> = active
                .iter_mut()
                .filter(|a| a.done < a.stage.passes())
                .map(|a| Box::new(move |ev: &UpdateEvent| a.stage.feed(ev)) as Box<dyn FnMut(&UpdateEvent) -> Result<()>>)
                .collect();
            let mut refs: Vec<&mut dyn FnMut(&UpdateEvent) -> Result<()>> =
                feeders.iter_mut().map(|f| f.as_mut() as &mut dyn FnMut(&UpdateEvent) -> Result<()>).collect();
            engine.run_fused(&mut refs)?;
        }
        let mut words = engine.n() as u64 + 2 * edges.len() as u64;
        for a in active.iter_mut() {
            if a.done < a.stage.passes() {
                words += a.stage.end_pass(a.done)?;
                a.done += 1;
            }
            words += 2 * a.stage.edges().len() as u64;
        }
        engine.checkpoint(words);
    }
}

/// Baswana–Sen clustering on a view: stage `j` lets every super-vertex in a
/// cluster whose center left `N_j` join an adjacent surviving cluster, or
/// else keep one edge to each adjacent cluster. Join edges are sampled
/// directly; for non-joiners a star sparse-recovery sketch finds the
/// adjacent clusters and the next pass fetches one edge to each.
struct BsStage {
    view: Rc<SuperGraphView>,
    steps: usize,
    in_n: Vec<Vec<bool>>,
    labels: Vec<Vec<Option<u32>>>,
    star_budget: u64,
    seed: SketchSeed,
    current: usize,
    join: BTreeMap<u32, L0Sketch>,
    star: BTreeMap<u32, SparseRecoverySketch>,
    reps: BTreeMap<u32, BTreeMap<u32, EdgeProbeSketch>>,
    rep_level: usize,
    pending: Vec<(u32, Vec<u32>)>,
    edges: BTreeSet<Edge>,
}

impl BsStage {
    fn new(view: Rc<SuperGraphView>, p: f64, steps: usize, seed: u64) -> Self {
        let count = view.super_count();
        let in_n = nested_centers(count, p, steps, derive_str(seed, "centers"));
        let labels = vec![(0..count as u32).map(Some).collect()];
        let star_budget = budget(1.0 / p, view.base_n(), count);
        BsStage {
            view,
            steps,
            in_n,
            labels,
            star_budget,
            seed: SketchSeed::new(derive_str(seed, "sketches")),
            current: 0,
            join: BTreeMap::new(),
            star: BTreeMap::new(),
            reps: BTreeMap::new(),
            rep_level: 0,
            pending: Vec::new(),
            edges: BTreeSet::new(),
        }
    }
}

impl Stage for BsStage {
    fn passes(&self) -> usize {
        if self.steps == 0 {
            0
        } else {
            self.steps + 1
        }
    }

    fn ready_after(&self) -> usize {
        self.steps
    }

    fn begin_pass(&mut self, idx: usize) -> Result<()> {
        let j = idx + 1;
        self.current = j;
        let n = self.view.base_n();
        let dim = (n as u64 * n as u64).max(1);
        let count = self.view.super_count() as u64;
        if j <= self.steps {
            let prev = &self.labels[j - 1];
            for (sv, lab) in prev.iter().enumerate() {
                if let Some(z) = *lab {
                    if !self.in_n[j][z as usize] {
                        self.join.insert(sv as u32, L0Sketch::new(dim, self.seed.child(2 * j as u64)));
                        self.star.insert(
                            sv as u32,
                            SparseRecoverySketch::new(count.max(1), self.star_budget, self.seed.child(2 * j as u64 + 1)),
                        );
                    }
                }
            }
        }
        let probe_seed = self.seed.child(10_000 + j as u64);
        for (sv, zs) in self.pending.drain(..) {
            let m = self.reps.entry(sv).or_default();
            for z in zs {
                m.insert(z, EdgeProbeSketch::routed(n, EdgeProbeMode::Single, probe_seed));
            }
        }
        self.rep_level = j.saturating_sub(2);
        Ok(())
    }

    fn feed(&mut self, ev: &UpdateEvent) -> Result<()> {
        let Some((sx, sy)) = self.view.translate(ev.edge) else {
            return Ok(());
        };
        let (x, y) = ev.edge;
        let d = ev.delta();
        let n = self.view.base_n();
        let j = self.current;
        for (a, b, sa, sb) in [(x, y, sx, sy), (y, x, sy, sx)] {
            if j <= self.steps {
                let prev = &self.labels[j - 1];
                if let Some(lb) = prev[sb as usize] {
                    if self.in_n[j][lb as usize] {
                        if let Some(s) = self.join.get_mut(&sa) {
                            s.update(pair_index(n, a, b), d)?;
                        }
                    } else if prev[sa as usize] != Some(lb) {
                        if let Some(s) = self.star.get_mut(&sa) {
                            s.update(lb as u64, d)?;
                        }
                    }
                }
            }
            if let Some(m) = self.reps.get_mut(&sa) {
                if let Some(lb) = self.labels[self.rep_level][sb as usize] {
                    if let Some(probe) = m.get_mut(&lb) {
                        probe.update_edge(a, b, d)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn end_pass(&mut self, idx: usize) -> Result<u64> {
        let j = idx + 1;
        let n = self.view.base_n();
        let words = self.join.values().map(|s| s.words()).sum::<u64>()
            + self.star.values().map(|s| s.words()).sum::<u64>()
            + self.reps.values().flat_map(|m| m.values()).map(|p| p.words()).sum::<u64>();
        for (sv, m) in std::mem::take(&mut self.reps) {
            for (z, probe) in m {
                match probe.edge_between() {
                    EdgeProbe::Edge(e) => {
                        self.edges.insert(e);
                    }
                    EdgeProbe::None => {
                        return Err(failure(format!("no edge from super-vertex {sv} to cluster {z} despite a nonzero count")))
                    }
                    EdgeProbe::Fail => return Err(failure("representative-edge sampler failed")),
                }
            }
        }
        if j <= self.steps {
            let prev = &self.labels[j - 1];
            let mut next: Vec<Option<u32>> =
                prev.iter().map(|l| l.filter(|&z| self.in_n[j][z as usize])).collect();
            let join = std::mem::take(&mut self.join);
            let mut star = std::mem::take(&mut self.star);
            for (sv, sk) in join {
                match sk.sample() {
                    L0Outcome::Sample { index, .. } => {
                        let e = pair_from_index(n, index);
                        let other = if self.view.super_of(e.0) == Some(sv) { e.1 } else { e.0 };
                        let w = self.view.super_of(other).expect("sampled edge lies in the view");
                        next[sv as usize] = prev[w as usize];
                        self.edges.insert(e);
                    }
                    L0Outcome::Empty => match star.remove(&sv).expect("star built with join").decode() {
                        SparseDecode::Exact(v) => {
                            if !v.is_empty() {
                                self.pending.push((sv, v.into_iter().map(|(z, _)| z as u32).collect()));
                            }
                        }
                        SparseDecode::Overflow => {
                            return Err(failure(format!("super-vertex {sv} borders more clusters than its budget")))
                        }
                    },
                    L0Outcome::Fail => return Err(failure("join sampler failed")),
                }
            }
            self.labels.push(next);
        }
        Ok(words)
    }

    fn partition(&self) -> Option<PartialPartition> {
        let top = self.labels.get(self.steps)?;
        let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (sv, lab) in top.iter().enumerate() {
            if let Some(z) = lab {
                groups.entry(*z).or_default().push(sv as u32);
            }
        }
        Some(self.view.partition_from(groups))
    }

    fn view(&self) -> &Rc<SuperGraphView> {
        &self.view
    }

    fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }
}

struct Terminal {
    level: usize,
    members: Vec<VertexId>,
}

/// Kapralov–Woodruff clustering on a view. Pass one keeps, per super-vertex
/// and level `j`, an ℓ0-sampler over its edges into `N_j`; merging those
/// over a cluster yields its join edge, so every level is settled after one
/// pass. Clusters that find no edge become terminal, and pass two keeps one
/// edge from each terminal cluster to every neighboring super-vertex.
struct KwStage {
    view: Rc<SuperGraphView>,
    p: f64,
    levels: usize,
    terminal_top: bool,
    in_n: Vec<Vec<bool>>,
    seed: SketchSeed,
    level_sk: Vec<BTreeMap<u32, L0Sketch>>,
    terminals: Vec<Terminal>,
    term_of: Vec<Option<u32>>,
    subset: Vec<SubsetSketch>,
    top: Option<BTreeMap<u32, Vec<u32>>>,
    current: usize,
    edges: BTreeSet<Edge>,
}

impl KwStage {
    fn new(view: Rc<SuperGraphView>, p: f64, levels: usize, terminal_top: bool, seed: u64) -> Self {
        let count = view.super_count();
        let in_n = nested_centers(count, p, levels, derive_str(seed, "centers"));
        let top = (levels == 0 && !terminal_top).then(|| (0..count as u32).map(|s| (s, vec![s])).collect());
        KwStage {
            view,
            p,
            levels,
            terminal_top,
            in_n,
            seed: SketchSeed::new(derive_str(seed, "sketches")),
            level_sk: Vec::new(),
            terminals: Vec::new(),
            term_of: vec![None; count],
            subset: Vec::new(),
            top,
            current: 0,
            edges: BTreeSet::new(),
        }
    }

    fn settle_levels(&mut self) -> Result<()> {
        let n = self.view.base_n();
        let count = self.view.super_count() as u32;
        let mut clusters: BTreeMap<u32, Vec<u32>> = (0..count).map(|s| (s, vec![s])).collect();
        for j in 1..=self.levels {
            let in_j = &self.in_n[j];
            let mut next: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
            for (&v, mem) in &clusters {
                if in_j[v as usize] {
                    next.insert(v, mem.clone());
                }
            }
            for (&v, mem) in &clusters {
                if in_j[v as usize] {
                    continue;
                }
                let mut merged: Option<L0Sketch> = None;
                for s in mem {
                    if let Some(sk) = self.level_sk[j - 1].get(s) {
                        match &mut merged {
                            None => merged = Some(sk.clone()),
                            Some(m) => m.merge(sk)?,
                        }
                    }
                }
                match merged.map_or(L0Outcome::Empty, |m| m.sample()) {
                    L0Outcome::Sample { index, .. } => {
                        let e = pair_from_index(n, index);
                        let (sa, sb) = self.view.translate(e).expect("sampled edge lies in the view");
                        let u = if in_j[sa as usize] { sa } else { sb };
                        next.get_mut(&u).expect("centers of N_j carry clusters").extend(mem.iter().copied());
                        self.edges.insert(e);
                    }
                    L0Outcome::Empty => {
                        self.terminals.push(Terminal { level: j - 1, members: self.view.base_members(mem) });
                        for &s in mem {
                            self.term_of[s as usize] = Some(self.terminals.len() as u32 - 1);
                        }
                    }
                    L0Outcome::Fail => return Err(failure("cluster join sampler failed")),
                }
            }
            for m in next.values_mut() {
                m.sort_unstable();
            }
            clusters = next;
        }
        if self.terminal_top {
            for mem in clusters.values() {
                self.terminals.push(Terminal { level: self.levels, members: self.view.base_members(mem) });
                for &s in mem {
                    self.term_of[s as usize] = Some(self.terminals.len() as u32 - 1);
                }
            }
            self.top = Some(BTreeMap::new());
        } else {
            self.top = Some(clusters);
        }
        Ok(())
    }
}

impl Stage for KwStage {
    fn passes(&self) -> usize {
        if self.levels == 0 && !self.terminal_top {
            0
        } else {
            2
        }
    }

    fn ready_after(&self) -> usize {
        self.passes().min(1)
    }

    fn begin_pass(&mut self, idx: usize) -> Result<()> {
        self.current = idx;
        let n = self.view.base_n();
        if idx == 0 {
            self.level_sk = (0..self.levels).map(|_| BTreeMap::new()).collect();
        } else {
            let parts = self.view.super_count() as u64;
            for (t, term) in self.terminals.iter().enumerate() {
                let s = budget(self.p.powi(-(term.level as i32 + 1)), n, parts as usize);
                let part_dim = (term.members.len() as u64 * n as u64).max(1);
                self.subset.push(SubsetSketch::new(parts.max(1), part_dim, s, self.seed.child(50_000 + t as u64)));
            }
        }
        Ok(())
    }

    fn feed(&mut self, ev: &UpdateEvent) -> Result<()> {
        let Some((sx, sy)) = self.view.translate(ev.edge) else {
            return Ok(());
        };
        let (x, y) = ev.edge;
        let d = ev.delta();
        let n = self.view.base_n();
        for (a, b, sa, sb) in [(x, y, sx, sy), (y, x, sy, sx)] {
            if self.current == 0 {
                for j in 1..=self.levels {
                    if self.in_n[j][sb as usize] && !self.in_n[j][sa as usize] {
                        let seed = self.seed.child(j as u64);
                        let dim = (n as u64 * n as u64).max(1);
                        self.level_sk[j - 1]
                            .entry(sa)
                            .or_insert_with(|| L0Sketch::new(dim, seed))
                            .update(pair_index(n, a, b), d)?;
                    }
                }
            } else if let Some(t) = self.term_of[sa as usize] {
                if self.term_of[sb as usize] != Some(t) {
                    let term = &self.terminals[t as usize];
                    let pos = term.members.binary_search(&a).expect("member of its terminal cluster") as u64;
                    self.subset[t as usize].update_local(sb as u64, pos * n as u64 + b as u64, d)?;
                }
            }
        }
        Ok(())
    }

    fn end_pass(&mut self, idx: usize) -> Result<u64> {
        let n = self.view.base_n();
        if idx == 0 {
            let dim = (n as u64 * n as u64).max(1);
            let per = L0Sketch::new(dim, self.seed).words();
            let mut words = 0;
            for j in 1..=self.levels {
                words += self.in_n[j].iter().filter(|&&c| !c).count() as u64 * per;
            }
            self.settle_levels()?;
            self.level_sk.clear();
            Ok(words)
        } else {
            let words = self.subset.iter().map(|s| s.words()).sum();
            for (t, sk) in std::mem::take(&mut self.subset).into_iter().enumerate() {
                match sk.recover() {
                    SubsetOutcome::Recovered(list) => {
                        let members = &self.terminals[t].members;
                        for (_, local, _) in list {
                            let x = members[(local / n as u64) as usize];
                            let y = (local % n as u64) as VertexId;
                            self.edges.insert(canonical(x, y));
                        }
                    }
                    SubsetOutcome::Overflow => {
                        return Err(failure(format!("terminal cluster {t} has more neighbors than its budget")))
                    }
                    SubsetOutcome::Fail { part } => {
                        return Err(failure(format!("terminal cluster {t}: sampler for neighbor {part} failed")))
                    }
                }
            }
            Ok(words)
        }
    }

    fn partition(&self) -> Option<PartialPartition> {
        if self.terminal_top {
            return None;
        }
        self.top.clone().map(|g| self.view.partition_from(g))
    }

    fn view(&self) -> &Rc<SuperGraphView> {
        &self.view
    }

    fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }
}

/// Single pass keeping one edge per pair of `(super-vertex, cluster)` or
/// per pair of clusters, with samplers created on first touch. Space is
/// charged for every admissible pair.
struct ProbeStage {
    view: Rc<SuperGraphView>,
    /// Cluster id per super-vertex; `None` probes super-vertex pairs.
    label: Option<Vec<Option<u32>>>,
    seed: SketchSeed,
    probes: BTreeMap<(u32, u32), EdgeProbeSketch>,
    charged_pairs: u64,
    edges: BTreeSet<Edge>,
}

impl ProbeStage {
    /// One edge between every two super-vertices of `view`.
    fn pairs(view: Rc<SuperGraphView>, seed: u64) -> Self {
        let c = view.super_count() as u64;
        ProbeStage {
            view,
            label: None,
            seed: SketchSeed::new(seed),
            probes: BTreeMap::new(),
            charged_pairs: c * c.saturating_sub(1) / 2,
            edges: BTreeSet::new(),
        }
    }

    /// One edge from every clustered super-vertex to each other cluster.
    fn vertex_to_cluster(view: Rc<SuperGraphView>, p: &PartialPartition, seed: u64) -> Self {
        let mut label = vec![None; view.super_count()];
        let mut clustered = 0u64;
        for (i, c) in p.clusters.iter().enumerate() {
            for &s in &c.supers {
                label[s as usize] = Some(i as u32);
                clustered += 1;
            }
        }
        let charged_pairs = clustered * (p.len() as u64).saturating_sub(1);
        ProbeStage { view, label: Some(label), seed: SketchSeed::new(seed), probes: BTreeMap::new(), charged_pairs, edges: BTreeSet::new() }
    }
}

impl Stage for ProbeStage {
    fn passes(&self) -> usize {
        1
    }

    fn ready_after(&self) -> usize {
        1
    }

    fn begin_pass(&mut self, _idx: usize) -> Result<()> {
        Ok(())
    }

    fn feed(&mut self, ev: &UpdateEvent) -> Result<()> {
        let Some((sx, sy)) = self.view.translate(ev.edge) else {
            return Ok(());
        };
        let (x, y) = ev.edge;
        let n = self.view.base_n();
        let seed = self.seed;
        let mut touch = |key: (u32, u32)| {
            self.probes
                .entry(key)
                .or_insert_with(|| EdgeProbeSketch::routed(n, EdgeProbeMode::Single, seed))
                .update_edge(x, y, ev.delta())
                .map(|_| ())
        };
        match &self.label {
            None => touch((sx.min(sy), sx.max(sy))),
            Some(label) => {
                let (la, lb) = (label[sx as usize], label[sy as usize]);
                if let (Some(la), Some(lb)) = (la, lb) {
                    if la != lb {
                        touch((sx, lb))?;
                        touch((sy, la))?;
                    }
                }
                Ok(())
            }
        }
    }

    fn end_pass(&mut self, _idx: usize) -> Result<u64> {
        let per = EdgeProbeSketch::routed(self.view.base_n(), EdgeProbeMode::Single, self.seed).words();
        for probe in std::mem::take(&mut self.probes).into_values() {
            match probe.edge_between() {
                EdgeProbe::Edge(e) => {
                    self.edges.insert(e);
                }
                EdgeProbe::None => {}
                EdgeProbe::Fail => return Err(failure("pair sampler failed")),
            }
        }
        Ok(self.charged_pairs * per)
    }

    fn partition(&self) -> Option<PartialPartition> {
        None
    }

    fn view(&self) -> &Rc<SuperGraphView> {
        &self.view
    }

    fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }
}

// ---------------------------------------------------------------------------
// Public entry points

/// Runs `attempt` with the caller's seed, then with up to [`MAX_RETRIES`]
/// fresh seeds while it fails retryably. Returns the value and the number
/// of attempts used.
fn with_retries<T>(seed: u64, mut attempt: impl FnMut(u64) -> Result<T>) -> Result<(T, u32)> {
    let mut last = String::new();
    for a in 0..=MAX_RETRIES {
        let s = if a == 0 { seed } else { derive(seed, 0x7e7e_0000 + a as u64) };
        match attempt(s) {
            Ok(v) => return Ok((v, a + 1)),
            Err(e) if e.is_retryable() => last = e.to_string(),
            Err(e) => return Err(e),
        }
    }
    Err(Error::RandomnessExhausted { attempts: MAX_RETRIES + 1, last })
}

/// Partition `P`, companion subgraph `H` and the metered cost of producing
/// them.
#[derive(Clone, Debug)]
pub struct ClusteringOutput {
    pub partition: PartialPartition,
    pub h: UnweightedGraph,
    pub passes: u64,
    pub peak_words: u64,
    pub attempts: u32,
}

fn check_clustering_params(n: usize, p: f64, i: usize) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Parameter(format!("center probability must lie in (0, 1], got {p}")));
    }
    if p < 1.0 && i as f64 > ln_n(n) / (1.0 / p).ln() + 1e-9 {
        return Err(Error::Parameter(format!("i = {i} exceeds log_(1/p) n")));
    }
    Ok(())
}

fn run_clustering(
    src: &StreamSource,
    view: &SuperGraphView,
    seed: u64,
    make: impl Fn(Rc<SuperGraphView>, u64) -> Box<dyn Stage>,
) -> Result<ClusteringOutput> {
    if view.base_n() != src.n() {
        return Err(Error::SizeMismatch(view.base_n(), src.n()));
    }
    let ((edges, partition, passes, peak_words), attempts) = with_retries(seed, |s| {
        let engine = StreamEngine::new(src);
        let mut partition = None;
        let edges = drive(&engine, make(Rc::new(view.clone()), s), |p, _| {
            partition = Some(p);
            Ok(None)
        })?;
        Ok((edges, partition.unwrap_or_default(), engine.passes(), engine.peak_words()))
    })?;
    let h = UnweightedGraph::from_edges(src.n(), edges)?;
    Ok(ClusteringOutput { partition, h, passes, peak_words, attempts })
}

/// Baswana–Sen clustering with `i` steps at center probability `p`, in
/// `i + 1` passes (none when `i = 0`). Clusters have radius at most `i` in
/// `H`; edges leaving the clustered set are spanned within `2i - 1`.
pub fn bs_clustering(src: &StreamSource, p: f64, i: usize, seed: u64) -> Result<ClusteringOutput> {
    bs_clustering_view(src, &SuperGraphView::identity(src.n()), p, i, seed)
}

pub fn bs_clustering_view(src: &StreamSource, view: &SuperGraphView, p: f64, i: usize, seed: u64) -> Result<ClusteringOutput> {
    check_clustering_params(src.n(), p, i)?;
    run_clustering(src, view, seed, |v, s| Box::new(BsStage::new(v, p, i, s)))
}

/// Kapralov–Woodruff clustering with `i` levels at center probability `p`,
/// in two passes (none when `i = 0`). Clusters have radius at most
/// `2^i - 1` in `H`, and so do edges leaving the clustered set.
pub fn kw_clustering(src: &StreamSource, p: f64, i: usize, seed: u64) -> Result<ClusteringOutput> {
    kw_clustering_view(src, &SuperGraphView::identity(src.n()), p, i, seed)
}

pub fn kw_clustering_view(src: &StreamSource, view: &SuperGraphView, p: f64, i: usize, seed: u64) -> Result<ClusteringOutput> {
    check_clustering_params(src.n(), p, i)?;
    run_clustering(src, view, seed, |v, s| Box::new(KwStage::new(v, p, i, false, s)))
}

fn finish_report(
    algo: &str,
    params: RunParams,
    src: &StreamSource,
    edges: BTreeSet<Edge>,
    passes: u64,
    peak_words: u64,
    attempts: u32,
    bound: f64,
    start: Instant,
) -> Result<SpannerOutput> {
    let g = src.materialize();
    let spanner = UnweightedGraph::from_edges(src.n(), edges)?;
    let mut report = RunReport::new(algo, params, &g);
    report.passes = passes;
    report.peak_words = peak_words;
    report.attempts = attempts;
    report.metering = Metering::Metered;
    report.certify(&g, &spanner, Some(bound))?;
    report.wall_ms = start.elapsed().as_millis() as u64;
    Ok(SpannerOutput { spanner, report, witness: BTreeMap::new() })
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    Ok(())
}

/// `(2k - 1)`-spanner in `k` passes.
pub fn baswana_sen(src: &StreamSource, k: u32, seed: u64) -> Result<SpannerOutput> {
    check_k(k)?;
    let start = Instant::now();
    let n = src.n();
    let p = (n.max(1) as f64).powf(-1.0 / k as f64);
    let ((edges, passes, words), attempts) = with_retries(seed, |s| {
        let engine = StreamEngine::new(src);
        let first = Box::new(BsStage::new(Rc::new(SuperGraphView::identity(n)), p, k as usize - 1, s));
        let edges = drive(&engine, first, |part, view| {
            Ok(Some(Box::new(ProbeStage::vertex_to_cluster(view.clone(), &part, derive_str(s, "last"))) as Box<dyn Stage>))
        })?;
        Ok((edges, engine.passes(), engine.peak_words()))
    })?;
    let params = RunParams { k: Some(k as f64), seed, ..Default::default() };
    let mut out = finish_report("bs", params, src, edges, passes, words, attempts, (2 * k - 1) as f64, start)?;
    out.report.note("pass_bound", k);
    Ok(out)
}

/// `(2^k - 1)`-spanner in two passes.
pub fn kapralov_woodruff(src: &StreamSource, k: u32, seed: u64) -> Result<SpannerOutput> {
    check_k(k)?;
    if k > 62 {
        return Err(Error::Parameter(format!("k = {k} is too large")));
    }
    let start = Instant::now();
    let n = src.n();
    let p = (n.max(1) as f64).powf(-1.0 / k as f64);
    let ((edges, passes, words), attempts) = with_retries(seed, |s| {
        let engine = StreamEngine::new(src);
        let first = Box::new(KwStage::new(Rc::new(SuperGraphView::identity(n)), p, k as usize - 1, true, s));
        let edges = drive(&engine, first, |_, _| Ok(None))?;
        Ok((edges, engine.passes(), engine.peak_words()))
    })?;
    let params = RunParams { k: Some(k as f64), seed, ..Default::default() };
    let bound = ((1u64 << k) - 1) as f64;
    let mut out = finish_report("kw", params, src, edges, passes, words, attempts, bound, start)?;
    out.report.note("pass_bound", 2);
    Ok(out)
}

/// Recursive contraction: `g` clustering iterations on successively
/// contracted graphs, then one edge between every two surviving clusters.
/// Stretch is at most [`stretch_bound`], passes exactly [`pass_bound`].
pub fn recursive_spanner(src: &StreamSource, k: f64, g: u32, scheme: Scheme, seed: u64) -> Result<SpannerOutput> {
    let rp = RecursionParams::new(k, g)?;
    let n = src.n();
    if n >= 2 && k > (n as f64).log2() + GUARD {
        return Err(Error::Parameter(format!("k = {k} exceeds log2 n = {:.3}", (n as f64).log2())));
    }
    let start = Instant::now();
    let r = rp.r as usize;
    let make = |j: u32, view: Rc<SuperGraphView>, s: u64| -> Box<dyn Stage> {
        let p = rp.p(j, n);
        let s = derive(s, j as u64);
        match scheme {
            Scheme::Bs => Box::new(BsStage::new(view, p, r, s)),
            Scheme::Kw => Box::new(KwStage::new(view, p, r, false, s)),
        }
    };
    let (((edges, sizes), passes, words), attempts) = with_retries(seed, |s| {
        let engine = StreamEngine::new(src);
        let mut sizes = Vec::new();
        let first = make(1, Rc::new(SuperGraphView::identity(n)), s);
        let edges = drive(&engine, first, |part, view| {
            sizes.push(part.len());
            let j = sizes.len() as u32;
            let contracted = Rc::new(view.contract(&part));
            if j < g {
                return Ok(Some(make(j + 1, contracted, s)));
            }
            let limit = rp.cluster_pair_budget(n);
            let pc = part.len() as f64;
            if pc * pc > limit {
                return Err(Error::BudgetExceeded(format!("{} final clusters exceed the pair budget {limit:.1}", part.len())));
            }
            Ok(Some(Box::new(ProbeStage::pairs(contracted, derive_str(s, "pairs"))) as Box<dyn Stage>))
        })?;
        Ok(((edges, sizes), engine.passes(), engine.peak_words()))
    })?;
    let bound = rp.stretch_bound(scheme)? as f64;
    let params = RunParams { k: Some(k), g: Some(g), scheme: Some(scheme.name().into()), seed, ..Default::default() };
    let algo = format!("recursive-{}", scheme.name());
    let mut out = finish_report(&algo, params, src, edges, passes, words, attempts, bound, start)?;
    out.report.note("pass_bound", rp.pass_bound(scheme));
    out.report.note("steps_per_iteration", rp.r);
    out.report.note("cluster_counts", sizes);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{complete, cycle, gnp, to_stream};

    #[test]
    fn closed_forms() {
        assert_eq!(stretch_bound(7.0, 1, Scheme::Kw).unwrap(), 29);
        assert_eq!(stretch_bound(7.0, 1, Scheme::Bs).unwrap(), 13);
        assert_eq!(pass_bound(7.0, 1, Scheme::Kw).unwrap(), 2);
        assert_eq!(pass_bound(7.0, 1, Scheme::Bs).unwrap(), 4);
        assert_eq!(stretch_bound(31.0, 2, Scheme::Bs).unwrap(), 97);
        assert_eq!(stretch_bound(31.0, 2, Scheme::Kw).unwrap(), 449);
        assert_eq!(stretch_bound(31.0, 1, Scheme::Kw).unwrap(), (1 << 17) - 3);
        assert_eq!(stretch_bound(3.0, 1, Scheme::Kw).unwrap(), 5);
        assert_eq!(pass_bound(31.0, 2, Scheme::Bs).unwrap(), 7);
    }

    #[test]
    fn exact_ceilings_at_perfect_powers() {
        assert_eq!(RecursionParams::new(53.0, 3).unwrap().c(), 3);
        assert_eq!(RecursionParams::new(17.0, 3).unwrap().c(), 3);
        assert_eq!(RecursionParams::new(7.0, 1).unwrap().c(), 4);
        let rp = RecursionParams::new(31.0, 2).unwrap();
        assert_eq!(rp.d_exact(3).unwrap(), BigRational::new(16.into(), 31.into()));
    }

    #[test]
    fn g_range_is_checked() {
        assert!(RecursionParams::new(3.0, 3).is_err());
        assert!(RecursionParams::new(4.0, 2).is_ok());
        assert!(RecursionParams::new(4.0, 3).is_err());
        assert!(RecursionParams::new(1.0, 1).is_err());
    }

    #[test]
    fn bs_k2_keeps_a_long_cycle() {
        let g = cycle(50);
        let out = baswana_sen(&StreamSource::from_graph(&g), 2, 3).unwrap();
        assert_eq!(out.spanner, g);
        assert_eq!(out.report.passes, 2);
        assert!(out.report.verified);
    }

    #[test]
    fn bs_and_kw_on_a_clique() {
        let g = complete(16);
        let src = StreamSource::from_graph(&g);
        for k in 1..=3 {
            let bs = baswana_sen(&src, k, 5).unwrap();
            assert_eq!(bs.report.passes, k as u64);
            assert!(bs.report.max_stretch.unwrap() <= 2 * k - 1, "bs k={k}");
            let kw = kapralov_woodruff(&src, k, 5).unwrap();
            assert_eq!(kw.report.passes, 2);
            assert!(kw.report.max_stretch.unwrap() <= (1 << k) - 1, "kw k={k}");
        }
    }

    #[test]
    fn trivial_clusterings() {
        let src = StreamSource::from_graph(&gnp(40, 0.2, 1));
        let zero = bs_clustering(&src, 0.5, 0, 1).unwrap();
        assert_eq!((zero.passes, zero.partition.len(), zero.h.m()), (0, 40, 0));
        let full = bs_clustering(&src, 1.0, 2, 1).unwrap();
        assert_eq!((full.passes, full.partition.len(), full.h.m()), (3, 40, 0));
    }

    #[test]
    fn clustering_certificates() {
        let g = gnp(120, 0.06, 4);
        let src = to_stream(&g, 0.3, 4).unwrap();
        for i in 1..=3usize {
            let p = (120f64).powf(-1.0 / 4.0);
            let bs = bs_clustering(&src, p, i, 9).unwrap();
            assert_eq!(bs.passes, i as u64 + 1);
            assert!(bs.partition.is_disjoint());
            assert!(bs.partition.max_diameter(&bs.h).unwrap() <= 2 * i as u32);
            assert!(outside_edges_within(&g, &bs.h, &bs.partition, 2 * i as u32 - 1));
            let kw = kw_clustering(&src, p, i, 9).unwrap();
            assert_eq!(kw.passes, 2);
            assert!(kw.partition.is_disjoint());
            let radius = (1u32 << i) - 1;
            assert!(kw.partition.max_diameter(&kw.h).unwrap() <= 2 * radius);
            assert!(outside_edges_within(&g, &kw.h, &kw.partition, radius));
        }
    }

    #[test]
    fn recursive_meets_pass_and_stretch_bounds() {
        let g = gnp(160, 0.08, 2);
        let src = to_stream(&g, 0.2, 2).unwrap();
        for (k, gg) in [(3.0, 1), (3.0, 2), (7.0, 1), (7.0, 2)] {
            for scheme in [Scheme::Kw, Scheme::Bs] {
                let out = recursive_spanner(&src, k, gg, scheme, 11).unwrap();
                assert_eq!(out.report.passes, pass_bound(k, gg, scheme).unwrap(), "{k} {gg} {scheme:?}");
                assert!(out.report.verified, "{k} {gg} {scheme:?}");
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let src = to_stream(&gnp(60, 0.15, 8), 0.25, 8).unwrap();
        let a = recursive_spanner(&src, 3.0, 1, Scheme::Kw, 4).unwrap();
        let b = recursive_spanner(&src, 3.0, 1, Scheme::Kw, 4).unwrap();
        assert_eq!(a.spanner, b.spanner);
        assert_eq!(a.report.canonical_json(), b.report.canonical_json());
    }
}
