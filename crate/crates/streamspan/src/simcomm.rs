//! Simultaneous communication: one player per vertex, shared randomness, a
//! public board with exact bit accounting, and the protocols built on it
//! (filtering, low-diameter decomposition, low-degree peeling and the
//! communication tradeoffs).
//!
//! A player sees its own neighborhood, the shared seed and the board of
//! earlier rounds. Public computations that every player would repeat
//! identically from the board are run once.

use crate::error::{Error, Result};
use crate::graph::{bfs_limited, canonical, Edge, UnweightedGraph, VertexId, WeightedGraph, UNREACHABLE};
use crate::report::{Metering, RegressionStore, RunParams, RunReport, Shape};
use crate::rng::{derive, derive_str, rng};
use crate::scalar::Scalar;
use crate::sketch::{from_bytes, to_bytes, LinearSketch, SketchSeed, SparseDecode, SparseRecoverySketch};
use crate::spanner::{build_subset_cover, sparsify_on};
use crate::sparsify::{spectral_sparsify, SparsifierParams, DEFAULT_OVERSAMPLE, MAX_EPS};
use base64::Engine as _;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

/// One posted message. `charged_bits` replaces the byte count when the
/// payload stands in for a black-box sketch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub payload: Vec<u8>,
    pub charged_bits: Option<u64>,
}

impl Message {
    /// Counted at its exact length.
    pub fn metered(payload: Vec<u8>) -> Self {
        Message { payload, charged_bits: None }
    }

    pub fn charged(payload: Vec<u8>, bits: u64) -> Self {
        Message { payload, charged_bits: Some(bits) }
    }

    pub fn bits(&self) -> u64 {
        self.charged_bits.unwrap_or(8 * self.payload.len() as u64)
    }
}

/// Messages of completed rounds, indexed by round then player.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Board {
    rounds: Vec<Vec<Message>>,
}

impl Board {
    pub fn rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn round(&self, r: usize) -> &[Message] {
        &self.rounds[r]
    }

    pub fn message(&self, r: usize, player: VertexId) -> &Message {
        &self.rounds[r][player as usize]
    }
}

/// Communication totals. Every field only grows as rounds are recorded.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommMeter {
    pub max_bits_per_player_per_round: u64,
    pub total_bits: u64,
    /// Longest message of each round.
    pub round_max_bits: Vec<u64>,
}

impl CommMeter {
    fn record(&mut self, msgs: &[Message]) {
        let longest = msgs.iter().map(Message::bits).max().unwrap_or(0);
        self.round_max_bits.push(longest);
        self.max_bits_per_player_per_round = self.max_bits_per_player_per_round.max(longest);
        self.total_bits += msgs.iter().map(Message::bits).sum::<u64>();
    }

    fn fill(&self, report: &mut RunReport) {
        report.max_bits_per_player_per_round = self.max_bits_per_player_per_round;
        report.total_bits = self.total_bits;
        report.rounds = self.round_max_bits.len() as u64;
    }
}

/// A read of `owner`'s neighborhood by `reader` during `round`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Access {
    pub round: usize,
    pub reader: VertexId,
    pub owner: VertexId,
}

/// Board plus the shared seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub seed: u64,
    pub board: Board,
}

#[derive(Serialize, Deserialize)]
struct TranscriptLine {
    round: usize,
    player: VertexId,
    bytes: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    charged_bits: Option<u64>,
    payload: String,
}

impl Transcript {
    /// One JSON object per line and per `(round, player)`.
    pub fn to_json_lines(&self) -> String {
        let b64 = base64::engine::general_purpose::STANDARD;
        let mut out = String::new();
        for (r, msgs) in self.board.rounds.iter().enumerate() {
            for (p, m) in msgs.iter().enumerate() {
                let line = TranscriptLine {
                    round: r,
                    player: p as VertexId,
                    bytes: m.payload.len(),
                    charged_bits: m.charged_bits,
                    payload: b64.encode(&m.payload),
                };
                out.push_str(&serde_json::to_string(&line).expect("line serializes"));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_json_lines(text: &str, seed: u64) -> Result<Self> {
        let b64 = base64::engine::general_purpose::STANDARD;
        let mut rounds: Vec<Vec<Message>> = Vec::new();
        for (i, raw) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            let line: TranscriptLine = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
            let payload = b64.decode(&line.payload).map_err(|e| bad(e.to_string()))?;
            if payload.len() != line.bytes {
                return Err(bad(format!("payload has {} bytes, header says {}", payload.len(), line.bytes)));
            }
            if line.round == rounds.len() {
                rounds.push(Vec::new());
            }
            let msgs = rounds.get_mut(line.round).ok_or_else(|| bad("rounds out of order".into()))?;
            if line.player as usize != msgs.len() {
                return Err(bad("players out of order".into()));
            }
            msgs.push(Message { payload, charged_bits: line.charged_bits });
        }
        Ok(Transcript { seed, board: Board { rounds } })
    }

    pub fn meter(&self) -> CommMeter {
        let mut m = CommMeter::default();
        for msgs in &self.board.rounds {
            m.record(msgs);
        }
        m
    }
}

/// What one player may look at while composing its message.
pub struct PlayerView<'a> {
    me: VertexId,
    round: usize,
    g: &'a UnweightedGraph,
    board: &'a Board,
    seed: u64,
    log: &'a RefCell<Vec<Access>>,
}

impl<'a> PlayerView<'a> {
    pub fn id(&self) -> VertexId {
        self.me
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn neighbors(&self) -> &'a [VertexId] {
        self.log.borrow_mut().push(Access { round: self.round, reader: self.me, owner: self.me });
        self.g.neighbors(self.me)
    }

    /// Logged like [`neighbors`](Self::neighbors); any owner other than the
    /// player itself is refused.
    pub fn neighborhood_of(&self, owner: VertexId) -> Result<&'a [VertexId]> {
        self.log.borrow_mut().push(Access { round: self.round, reader: self.me, owner });
        if owner != self.me {
            return Err(Error::Usage(format!("player {} read the neighborhood of player {owner}", self.me)));
        }
        Ok(self.g.neighbors(owner))
    }

    /// Rounds before the current one.
    pub fn board(&self) -> &'a Board {
        self.board
    }

    pub fn shared_seed(&self) -> u64 {
        self.seed
    }
}

/// Runs synchronized rounds over the players of `g`.
pub struct Simulator<'g> {
    g: &'g UnweightedGraph,
    seed: u64,
    board: Board,
    meter: CommMeter,
    log: RefCell<Vec<Access>>,
}

impl<'g> Simulator<'g> {
    pub fn new(g: &'g UnweightedGraph, seed: u64) -> Self {
        Simulator { g, seed, board: Board::default(), meter: CommMeter::default(), log: RefCell::new(Vec::new()) }
    }

    /// Every player composes a message from its view; the messages are
    /// posted together in player order.
    pub fn round<F>(&mut self, compose: F) -> Result<&[Message]>
    where
        F: Fn(&PlayerView<'_>) -> Result<Message>,
    {
        let r = self.board.rounds.len();
        let mut msgs = Vec::with_capacity(self.g.n());
        for me in 0..self.g.n() as VertexId {
            let view = PlayerView { me, round: r, g: self.g, board: &self.board, seed: self.seed, log: &self.log };
            msgs.push(compose(&view)?);
        }
        self.meter.record(&msgs);
        self.board.rounds.push(msgs);
        Ok(&self.board.rounds[r])
    }

    pub fn board(&self) -> &Board {
        &self.board
    }

    pub fn meter(&self) -> &CommMeter {
        &self.meter
    }

    pub fn accesses(&self) -> Vec<Access> {
        self.log.borrow().clone()
    }

    /// Logged reads of a neighborhood other than the reader's own.
    pub fn violations(&self) -> Vec<Access> {
        self.log.borrow().iter().copied().filter(|a| a.reader != a.owner).collect()
    }

    pub fn transcript(&self) -> Transcript {
        Transcript { seed: self.seed, board: self.board.clone() }
    }
}

fn put_u32s(out: &mut Vec<u8>, xs: &[u32]) {
    out.extend_from_slice(&(xs.len() as u32).to_le_bytes());
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

/// Reads a length-prefixed `u32` list, returning it and the rest.
fn take_u32s(bytes: &[u8]) -> Result<(Vec<u32>, &[u8])> {
    let word = |b: &[u8]| u32::from_le_bytes(b.try_into().expect("four bytes"));
    if bytes.len() < 4 {
        return Err(Error::Decode("truncated list header".into()));
    }
    let len = word(&bytes[..4]) as usize;
    let end = 4 + 4 * len;
    if bytes.len() < end {
        return Err(Error::Decode("truncated list".into()));
    }
    Ok((bytes[4..end].chunks_exact(4).map(word).collect(), &bytes[end..]))
}

/// Bits charged per player for one sparsifier instance on `n` vertices:
/// `⌈log2 n⌉²` words.
pub fn sparsifier_share_bits(n: usize) -> u64 {
    let l = (n.max(2) as f64).log2().ceil() as u64;
    64 * l * l
}

// ---------------------------------------------------------------------------
// Low-diameter decomposition

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LddCluster {
    pub center: VertexId,
    /// Sorted.
    pub members: Vec<VertexId>,
    pub radius: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LddOutput {
    pub phi: f64,
    pub clusters: Vec<LddCluster>,
    /// Total weight of edges between clusters.
    pub boundary_weight: f64,
    /// `Vol(h)`.
    pub volume: f64,
}

/// Independent checks of an [`LddOutput`] against its graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LddCertificate {
    pub partition: bool,
    /// Eccentricity of each center inside its cluster equals its radius.
    pub radii_match: bool,
    pub radius_within_bound: bool,
    pub boundary_within_phi: bool,
}

impl LddCertificate {
    pub fn holds(&self) -> bool {
        self.partition && self.radii_match && self.radius_within_bound && self.boundary_within_phi
    }
}

impl LddOutput {
    pub fn assignment(&self, n: usize) -> Vec<Option<usize>> {
        let mut a = vec![None; n];
        for (i, c) in self.clusters.iter().enumerate() {
            for &v in &c.members {
                a[v as usize] = Some(i);
            }
        }
        a
    }

    pub fn max_radius(&self) -> u32 {
        self.clusters.iter().map(|c| c.radius).max().unwrap_or(0)
    }

    /// `ln(max(Vol, 1)) / ln(1 + φ)`.
    pub fn radius_bound(&self) -> f64 {
        self.volume.max(1.0).ln() / (1.0 + self.phi).ln()
    }

    /// Edges of `g` whose endpoints lie in different clusters.
    pub fn crossing_edges(&self, g: &UnweightedGraph) -> BTreeSet<Edge> {
        let a = self.assignment(g.n());
        g.edges().filter(|&(u, v)| a[u as usize] != a[v as usize]).collect()
    }

    pub fn certify<T: Scalar>(&self, h: &WeightedGraph<T>) -> LddCertificate {
        let n = h.n();
        let mut seen = vec![0usize; n];
        for c in &self.clusters {
            for &v in &c.members {
                if (v as usize) < n {
                    seen[v as usize] += 1;
                }
            }
        }
        let partition = seen.iter().all(|&c| c == 1);
        let unweighted = h.unweighted();
        let radii_match = partition
            && self.clusters.iter().all(|c| {
                let inner = unweighted.induced(&c.members);
                let d = bfs_limited(&inner, c.center, u32::MAX - 1).expect("center in range");
                let ecc = c.members.iter().map(|&v| d.dist[v as usize]).max().unwrap_or(0);
                ecc == c.radius
            });
        let radius_within_bound = self.clusters.iter().all(|c| c.radius as f64 <= self.radius_bound() + 1e-9);
        let a = self.assignment(n);
        let crossing: f64 = h
            .edges()
            .filter(|&((u, v), _)| a[u as usize] != a[v as usize])
            .map(|(_, w)| w.to_f64().unwrap_or(f64::INFINITY))
            .sum();
        let vol = h.volume().to_f64().unwrap_or(f64::INFINITY);
        let boundary_within_phi = crossing <= self.phi * vol * (1.0 + 1e-9) + 1e-9;
        LddCertificate { partition, radii_match, radius_within_bound, boundary_within_phi }
    }
}

/// Ball growing: the smallest unclustered vertex becomes a center and its
/// hop ball in the remaining graph grows until `∂(B_r) < φ·Vol(B_r)` or the
/// ball has no boundary. Volumes and boundaries are weighted and measured in
/// the remaining graph.
pub fn ldd<T: Scalar>(h: &WeightedGraph<T>, phi: f64) -> Result<LddOutput> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::Parameter(format!("phi must lie in (0, 1), got {phi}")));
    }
    let n = h.n();
    let w = |x: T| x.to_f64().unwrap_or(f64::INFINITY);
    if h.edges().any(|(_, x)| w(x) < 1.0 - 1e-12) {
        return Err(Error::Parameter("ldd needs edge weights >= 1".into()));
    }
    let volume = w(h.volume());
    let mut remaining = vec![true; n];
    let mut in_ball = vec![false; n];
    let mut clusters = Vec::new();
    let mut boundary_weight = 0.0;
    for center in 0..n {
        if !remaining[center] {
            continue;
        }
        let mut members = vec![center as VertexId];
        let mut frontier = vec![center as VertexId];
        in_ball[center] = true;
        let (mut vol, mut boundary) = (0.0, 0.0);
        let absorb = |x: VertexId, vol: &mut f64, boundary: &mut f64, in_ball: &[bool]| {
            for &(y, wy) in h.neighbors(x) {
                if !remaining[y as usize] {
                    continue;
                }
                *vol += w(wy);
                if in_ball[y as usize] {
                    *boundary -= w(wy);
                } else {
                    *boundary += w(wy);
                }
            }
        };
        absorb(center as VertexId, &mut vol, &mut boundary, &in_ball);
        let mut radius = 0u32;
        loop {
            let closed = boundary <= 1e-9 * vol.max(1.0);
            if closed || boundary < phi * vol {
                break;
            }
            let mut next = Vec::new();
            for &x in &frontier {
                for &(y, _) in h.neighbors(x) {
                    if remaining[y as usize] && !in_ball[y as usize] {
                        in_ball[y as usize] = true;
                        next.push(y);
                    }
                }
            }
            for &y in &next {
                in_ball[y as usize] = false;
            }
            for &y in &next {
                absorb(y, &mut vol, &mut boundary, &in_ball);
                in_ball[y as usize] = true;
            }
            members.extend_from_slice(&next);
            frontier = next;
            radius += 1;
        }
        boundary_weight += boundary.max(0.0);
        for &v in &members {
            remaining[v as usize] = false;
            in_ball[v as usize] = false;
        }
        members.sort_unstable();
        clusters.push(LddCluster { center: center as VertexId, members, radius });
    }
    Ok(LddOutput { phi, clusters, boundary_weight, volume })
}

// ---------------------------------------------------------------------------
// Filtering

/// The two stretch regimes of the filtering protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `t = c₁ n^{(g+1)/(2g+1)} log2² n`.
    Resistance,
    /// `t = 12 n^{2/g} ln n`, with the decomposition parameter `φ = n^{-2/g}/3`.
    Ldd,
}

impl Regime {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "resistance" => Ok(Regime::Resistance),
            "ldd" => Ok(Regime::Ldd),
            other => Err(Error::Parameter(format!("unknown regime {other:?}; expected resistance or ldd"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::Resistance => "resistance",
            Regime::Ldd => "ldd",
        }
    }

    pub fn t(self, n: usize, g: u32) -> f64 {
        match self {
            Regime::Resistance => resistance_t(n, g),
            Regime::Ldd => ldd_t(n, g),
        }
    }
}

pub fn ldd_phi(n: usize, g: u32) -> f64 {
    (n.max(2) as f64).powf(-2.0 / g as f64) / 3.0
}

/// `12 n^{2/g} ln n`, which is `4 ln n / φ`.
pub fn ldd_t(n: usize, g: u32) -> f64 {
    let nf = n.max(2) as f64;
    12.0 * nf.powf(2.0 / g as f64) * nf.ln()
}

pub fn resistance_t(n: usize, g: u32) -> f64 {
    let shape = Shape { n: n.max(2) as f64, g: g as f64, ..Default::default() };
    RegressionStore::builtin().expect("any", "filtering", "t_resistance").bound(&shape)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FilterParams {
    pub t: f64,
    pub rounds: u32,
    /// Oversampling constant of the per-round sparsifier.
    pub oversample: f64,
    /// When set, each round also decomposes `H_i` with this `φ`.
    pub phi: Option<f64>,
    pub regime: Option<Regime>,
    pub seed: u64,
}

impl FilterParams {
    pub fn new(t: f64, rounds: u32, seed: u64) -> Result<Self> {
        if !(t >= 1.0 && t.is_finite()) {
            return Err(Error::Parameter(format!("t must be a finite value >= 1, got {t}")));
        }
        if rounds == 0 {
            return Err(Error::Parameter("filtering needs at least one round".into()));
        }
        Ok(FilterParams { t, rounds, oversample: DEFAULT_OVERSAMPLE, phi: None, regime: None, seed })
    }

    pub fn for_regime(n: usize, rounds: u32, regime: Regime, seed: u64) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::Parameter("filtering needs at least one round".into()));
        }
        let mut p = FilterParams::new(regime.t(n, rounds).max(1.0), rounds, seed)?;
        p.regime = Some(regime);
        if regime == Regime::Ldd {
            p.phi = Some(ldd_phi(n, rounds));
        }
        Ok(p)
    }

    pub fn with_oversample(mut self, c: f64) -> Result<Self> {
        self.oversample = SparsifierParams::default().with_oversample(c)?.oversample;
        Ok(self)
    }

    pub fn with_phi(mut self, phi: f64) -> Result<Self> {
        if !(phi > 0.0 && phi < 1.0) {
            return Err(Error::Parameter(format!("phi must lie in (0, 1), got {phi}")));
        }
        self.phi = Some(phi);
        Ok(self)
    }

    /// Largest integer distance that counts as satisfied.
    pub fn hops(&self) -> u32 {
        self.t.floor().min((UNREACHABLE - 1) as f64) as u32
    }

    fn sparsifier(&self, round: u32, tag: u64) -> SparsifierParams {
        SparsifierParams { eps: MAX_EPS, oversample: self.oversample, seed: derive(derive(self.seed, tag), round as u64) }
    }
}

/// Decomposition of one round's sparsifier.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LddRound {
    pub clusters: usize,
    pub max_radius: u32,
    /// Edges of `G_i` between clusters.
    pub crossing_edges: usize,
    pub certificate: LddCertificate,
}

/// Snapshot after round `round` (1-based).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FilterState {
    pub round: u32,
    /// `E_i`: edges still unsatisfied when the round began.
    pub surviving: BTreeSet<Edge>,
    pub sparsifier_edges: usize,
    /// `|Ĥ|` after the round.
    pub spanner_edges: usize,
    pub ldd: Option<LddRound>,
}

/// Public state of one filtering run on a graph with local ids.
struct FilterCore {
    hops: u32,
    hhat: UnweightedGraph,
    history: Vec<FilterState>,
    active: bool,
}

impl FilterCore {
    fn new(n: usize, hops: u32) -> Self {
        FilterCore { hops, hhat: UnweightedGraph::empty(n), history: Vec::new(), active: true }
    }

    /// Neighbors `w` of `me` with `d_Ĥ(me, w) > t`.
    fn survivors(&self, me: VertexId, neighbors: &[VertexId]) -> Vec<VertexId> {
        if self.hhat.m() == 0 {
            return neighbors.to_vec();
        }
        let d = bfs_limited(&self.hhat, me, self.hops).expect("player in range");
        neighbors.iter().copied().filter(|&w| d.dist[w as usize] > self.hops).collect()
    }

    fn absorb(&mut self, round: u32, surviving: BTreeSet<Edge>, sp: &SparsifierParams, phi: Option<f64>) -> Result<()> {
        let gi = UnweightedGraph::from_edges(self.hhat.n(), surviving.iter().copied())?;
        let hi = spectral_sparsify::<f64>(&gi, sp);
        let ldd_round = match phi {
            Some(phi) if gi.m() > 0 => {
                let d = ldd(&hi, phi)?;
                Some(LddRound {
                    clusters: d.clusters.len(),
                    max_radius: d.max_radius(),
                    crossing_edges: d.crossing_edges(&gi).len(),
                    certificate: d.certify(&hi),
                })
            }
            _ => None,
        };
        self.hhat.extend_edges(hi.edges().map(|(e, _)| e))?;
        if surviving.is_empty() {
            self.active = false;
        }
        self.history.push(FilterState {
            round,
            surviving,
            sparsifier_edges: hi.m(),
            spanner_edges: self.hhat.m(),
            ldd: ldd_round,
        });
        Ok(())
    }

    fn residual(&self, g: &UnweightedGraph) -> BTreeSet<Edge> {
        (0..g.n() as VertexId)
            .flat_map(|u| {
                let up: Vec<VertexId> = g.neighbors(u).iter().copied().filter(|&w| w > u).collect();
                self.survivors(u, &up).into_iter().map(move |w| (u, w))
            })
            .collect()
    }
}

/// Edges named by the lower endpoint of each pair.
fn edges_from_lists<'a>(lists: impl Iterator<Item = (VertexId, &'a [VertexId])>) -> BTreeSet<Edge> {
    lists.flat_map(|(u, ws)| ws.iter().filter(move |&&w| w > u).map(move |&w| (u, w))).collect()
}

#[derive(Clone, Debug)]
pub struct FilterOutput {
    /// `Ĥ`.
    pub spanner: UnweightedGraph,
    pub history: Vec<FilterState>,
    /// `E_{g+1}`.
    pub residual: BTreeSet<Edge>,
    pub emptied: bool,
    pub transcript: Transcript,
    pub meter: CommMeter,
    pub violations: usize,
    pub report: RunReport,
}

/// Filtering: in each round the surviving edges are sparsified, the
/// unweighted sparsifier joins `Ĥ`, and every player drops the incident
/// edges whose endpoints are within `t` hops in `Ĥ`. Each round's message
/// is the player's surviving neighbor list, charged at
/// [`sparsifier_share_bits`]. Stops early once no edge survives.
pub fn filtering_spanner(g: &UnweightedGraph, params: &FilterParams) -> Result<FilterOutput> {
    let start = Instant::now();
    let n = g.n();
    let share = sparsifier_share_bits(n);
    let mut sim = Simulator::new(g, params.seed);
    let mut core = FilterCore::new(n, params.hops());
    for round in 1..=params.rounds {
        if !core.active {
            break;
        }
        let msgs = sim.round(|view| {
            let mut payload = Vec::new();
            put_u32s(&mut payload, &core.survivors(view.id(), view.neighbors()));
            Ok(Message::charged(payload, share))
        })?;
        let lists: Vec<Vec<VertexId>> = msgs.iter().map(|m| take_u32s(&m.payload).map(|x| x.0)).collect::<Result<_>>()?;
        let surviving = edges_from_lists(lists.iter().enumerate().map(|(u, l)| (u as VertexId, l.as_slice())));
        core.absorb(round, surviving, &params.sparsifier(round, 0), params.phi)?;
    }
    let residual = core.residual(g);
    let emptied = residual.is_empty();
    let spanner = core.hhat.clone();

    let mut report = RunReport::new(
        "filtering",
        RunParams {
            t: Some(params.t),
            g: Some(params.rounds),
            regime: params.regime.map(|r| r.name().to_string()),
            seed: params.seed,
            ..Default::default()
        },
        g,
    );
    sim.meter().fill(&mut report);
    report.metering = Metering::Charged;
    report.note("emptied", emptied);
    report.note("residual_edges", residual.len());
    report.note("surviving_per_round", core.history.iter().map(|s| s.surviving.len()).collect::<Vec<_>>());
    if params.phi.is_some() {
        report.note("ldd_crossing_per_round", core.history.iter().map(|s| s.ldd.as_ref().map(|l| l.crossing_edges)).collect::<Vec<_>>());
    }
    report.certify(g, &spanner, Some(params.t))?;
    report.verified &= emptied;
    report.wall_ms = start.elapsed().as_millis() as u64;
    Ok(FilterOutput {
        spanner,
        history: core.history,
        residual,
        emptied,
        transcript: sim.transcript(),
        meter: sim.meter().clone(),
        violations: sim.violations().len(),
        report,
    })
}

// ---------------------------------------------------------------------------
// Low-degree peeling

/// Identical at every player when decoding succeeds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelResult {
    /// In peel order.
    pub v1: Vec<VertexId>,
    /// Ascending.
    pub v2: Vec<VertexId>,
    /// Every edge incident to `V1`.
    pub recovered: BTreeSet<Edge>,
}

impl PeelResult {
    /// Minimum degree of `G[V2]`, `None` when `V2` is empty.
    pub fn min_degree_v2(&self, g: &UnweightedGraph) -> Option<usize> {
        let inner = g.induced(&self.v2);
        self.v2.iter().map(|&v| inner.degree(v)).min()
    }
}

#[derive(Clone, Debug)]
pub struct PeelOutput {
    pub result: PeelResult,
    /// Bitwise equality of the serialized result across all players.
    pub replicas_agree: bool,
    pub meter: CommMeter,
    pub transcript: Transcript,
    pub attempts: u32,
    pub violations: usize,
    /// `spanner_edges` counts recovered edges; `verified` means the result
    /// equals the exact peel, every replica agrees and `G[V2]` has minimum
    /// degree above `s`.
    pub report: RunReport,
}

fn peel_seed(shared: u64) -> SketchSeed {
    SketchSeed::new(derive_str(shared, "peel"))
}

/// The player's sparse-recovery sketch of its neighborhood followed by its
/// degree as a little-endian `u64`.
fn peel_section(n: usize, s: u64, shared: u64, neighbors: &[VertexId]) -> Result<Vec<u8>> {
    let mut sk = SparseRecoverySketch::new(n.max(1) as u64, s, peel_seed(shared));
    for &w in neighbors {
        sk.update(w as u64, 1)?;
    }
    let mut out = to_bytes(&sk.to_words());
    out.extend_from_slice(&(neighbors.len() as u64).to_le_bytes());
    Ok(out)
}

/// Replays the peel from posted sections: repeatedly take the smallest
/// vertex of `V2` with current degree at most `s`, decode its sketch, and
/// subtract the recovered edges from its neighbors' sketches.
pub fn replay_peel(sections: &[&[u8]], s: u64, shared: u64) -> Result<PeelResult> {
    let n = sections.len();
    let seed = peel_seed(shared);
    let mut sketches = Vec::with_capacity(n);
    let mut degree = Vec::with_capacity(n);
    for sec in sections {
        if sec.len() < 8 {
            return Err(Error::Decode("peel section shorter than its degree field".into()));
        }
        let (body, deg) = sec.split_at(sec.len() - 8);
        sketches.push(SparseRecoverySketch::from_words(&from_bytes(body)?, seed)?);
        degree.push(u64::from_le_bytes(deg.try_into().expect("eight bytes")));
    }
    let mut in_v2 = vec![true; n];
    let mut low: BTreeSet<VertexId> = (0..n as VertexId).filter(|&v| degree[v as usize] <= s).collect();
    let mut v1 = Vec::new();
    let mut recovered = BTreeSet::new();
    while let Some(u) = low.pop_first() {
        let step = v1.len();
        let entries = match sketches[u as usize].decode() {
            SparseDecode::Exact(v) => v,
            SparseDecode::Overflow => {
                return Err(Error::SketchFailure(format!("peel step {step}: sketch of vertex {u} overflowed")));
            }
        };
        if entries.len() as u64 != degree[u as usize] || entries.iter().any(|&(w, x)| x != 1 || w as usize >= n) {
            return Err(Error::SketchFailure(format!("peel step {step}: sketch of vertex {u} decoded inconsistently")));
        }
        for (w, _) in entries {
            let w = w as VertexId;
            recovered.insert(canonical(u, w));
            sketches[w as usize].update(u as u64, -1)?;
            degree[w as usize] -= 1;
            if in_v2[w as usize] && degree[w as usize] <= s {
                low.insert(w);
            }
        }
        in_v2[u as usize] = false;
        degree[u as usize] = 0;
        v1.push(u);
    }
    let v2 = (0..n as VertexId).filter(|&v| in_v2[v as usize]).collect();
    Ok(PeelResult { v1, v2, recovered })
}

/// The same peel on the exact graph.
pub fn peel_oracle(g: &UnweightedGraph, s: u64) -> PeelResult {
    let n = g.n();
    let mut degree: Vec<u64> = (0..n as VertexId).map(|v| g.degree(v) as u64).collect();
    let mut in_v2 = vec![true; n];
    let mut v1 = Vec::new();
    let mut recovered = BTreeSet::new();
    loop {
        let Some(u) = (0..n as VertexId).find(|&v| in_v2[v as usize] && degree[v as usize] <= s) else { break };
        for &w in g.neighbors(u) {
            if in_v2[w as usize] {
                recovered.insert(canonical(u, w));
                degree[w as usize] -= 1;
            }
        }
        in_v2[u as usize] = false;
        v1.push(u);
    }
    PeelResult { v1, v2: (0..n as VertexId).filter(|&v| in_v2[v as usize]).collect(), recovered }
}

/// Replays the peel once per player and compares the serialized outputs.
fn replay_everywhere(sections: &[&[u8]], s: u64, shared: u64) -> Result<(PeelResult, bool)> {
    let first = replay_peel(sections, s, shared)?;
    let bytes = serde_json::to_vec(&first).expect("peel result serializes");
    let mut agree = true;
    for _ in 1..sections.len() {
        let again = replay_peel(sections, s, shared)?;
        agree &= serde_json::to_vec(&again).expect("peel result serializes") == bytes;
    }
    Ok((first, agree))
}

/// One round of peeling with real sketches. A decode failure is retried
/// with fresh shared randomness up to three times.
pub fn low_degree_peeling(g: &UnweightedGraph, s: u64, seed: u64) -> Result<PeelOutput> {
    if s == 0 {
        return Err(Error::Parameter("peeling needs s >= 1".into()));
    }
    let start = Instant::now();
    let mut last = String::new();
    for attempt in 0..=crate::multipass::MAX_RETRIES {
        let shared = if attempt == 0 { seed } else { derive(seed, 0x9ee1_0000 + attempt as u64) };
        let mut sim = Simulator::new(g, shared);
        sim.round(|view| Ok(Message::metered(peel_section(view.n(), s, view.shared_seed(), view.neighbors())?)))?;
        let sections: Vec<&[u8]> = sim.board().round(0).iter().map(|m| m.payload.as_slice()).collect();
        match replay_everywhere(&sections, s, shared) {
            Ok((result, replicas_agree)) => {
                let mut report =
                    RunReport::new("peeling", RunParams { s: Some(s), seed, ..Default::default() }, g);
                sim.meter().fill(&mut report);
                report.attempts = attempt + 1;
                report.spanner_edges = result.recovered.len();
                let min_degree = result.min_degree_v2(g);
                report.verified = replicas_agree
                    && result == peel_oracle(g, s)
                    && min_degree.map_or(true, |d| d as u64 > s);
                report.note("v1", result.v1.len());
                report.note("v2", result.v2.len());
                report.note("min_degree_v2", min_degree);
                report.note("replicas_agree", replicas_agree);
                report.wall_ms = start.elapsed().as_millis() as u64;
                return Ok(PeelOutput {
                    result,
                    replicas_agree,
                    meter: sim.meter().clone(),
                    transcript: sim.transcript(),
                    attempts: attempt + 1,
                    violations: sim.violations().len(),
                    report,
                });
            }
            Err(e) if e.is_retryable() => last = e.to_string(),
            Err(e) => return Err(e),
        }
    }
    Err(Error::RandomnessExhausted { attempts: crate::multipass::MAX_RETRIES + 1, last })
}

// ---------------------------------------------------------------------------
// Communication tradeoffs

#[derive(Clone, Debug)]
pub struct ScmOutput {
    pub spanner: UnweightedGraph,
    pub report: RunReport,
    pub meter: CommMeter,
    /// One-round runs only.
    pub peel: Option<PeelResult>,
    /// Multi-round runs: whether every subset's filtering emptied.
    pub emptied: Option<bool>,
    pub violations: usize,
}

fn membership(n: usize, sets: &[Vec<VertexId>]) -> Vec<Vec<u32>> {
    let mut m = vec![Vec::new(); n];
    for (i, s) in sets.iter().enumerate() {
        for &v in s {
            m[v as usize].push(i as u32);
        }
    }
    m
}

fn local_id(set: &[VertexId], v: VertexId) -> Option<VertexId> {
    set.binary_search(&v).ok().map(|i| i as VertexId)
}

/// Per-player communication of `Õ(n^α)` bits per round.
///
/// One round: every player posts its neighbor list as a stand-in for its
/// sparsifier sketches (one per subset of a pair cover with sets of size
/// about `2n^{1-α}`, and one per Bernoulli(`n^{-α}`) subset), charged
/// [`sparsifier_share_bits`] each, plus a real peeling section with
/// `s = ⌈n^α⌉`. The output is the union of the cover sparsifiers, the edges
/// recovered around `V1`, and the Bernoulli sparsifiers of `G[V2]`.
///
/// More rounds: filtering runs independently on every cover subset with
/// `t` the smaller of the two regimes at the subset size.
pub fn scm_tradeoff(g: &UnweightedGraph, alpha: f64, rounds: u32, seed: u64) -> Result<ScmOutput> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if rounds == 0 {
        return Err(Error::Parameter("at least one round is needed".into()));
    }
    let start = Instant::now();
    let n = g.n();
    let cover = build_subset_cover(n, alpha, derive_str(seed, "scm-cover"))?;
    let mut report =
        RunReport::new("scm", RunParams { alpha: Some(alpha), g: Some(rounds), seed, ..Default::default() }, g);
    report.note("subsets", cover.sets.len());
    report.note("max_subset_size", cover.max_set_size());
    let mut out = if rounds == 1 {
        scm_one_round(g, alpha, &cover.sets, seed, &mut report)?
    } else {
        scm_filtering(g, rounds, &cover.sets, seed, &mut report)?
    };
    out.spanner.check_subgraph_of(g)?;
    let bound = report.declared_bound;
    let emptied = out.emptied.unwrap_or(true);
    report.certify(g, &out.spanner, bound)?;
    report.verified &= emptied;
    report.wall_ms = start.elapsed().as_millis() as u64;
    out.report = report;
    Ok(out)
}

fn scm_one_round(
    g: &UnweightedGraph,
    alpha: f64,
    cover: &[Vec<VertexId>],
    seed: u64,
    report: &mut RunReport,
) -> Result<ScmOutput> {
    let n = g.n();
    let nf = n.max(2) as f64;
    let s = nf.powf(alpha).ceil().max(1.0) as u64;
    let p = nf.powf(-alpha);
    let count = (8.0 / (p * p) * nf.ln()).ceil() as usize;
    let mut r = rng(derive_str(seed, "scm-bernoulli"));
    let bern: Vec<Vec<VertexId>> =
        (0..count).map(|_| (0..n as VertexId).filter(|_| r.gen::<f64>() < p).collect()).collect();
    let cover_member = membership(n, cover);
    let bern_member = membership(n, &bern);

    let shared = derive_str(seed, "scm-shared");
    let mut sim = Simulator::new(g, shared);
    sim.round(|view| {
        let me = view.id() as usize;
        let nb = view.neighbors();
        let mut payload = Vec::new();
        put_u32s(&mut payload, nb);
        let section = peel_section(view.n(), s, view.shared_seed(), nb)?;
        let charged: u64 = cover_member[me].iter().map(|&i| sparsifier_share_bits(cover[i as usize].len())).sum::<u64>()
            + bern_member[me].iter().map(|&i| sparsifier_share_bits(bern[i as usize].len())).sum::<u64>()
            + 8 * section.len() as u64;
        payload.extend_from_slice(&section);
        Ok(Message::charged(payload, charged))
    })?;

    let mut lists = Vec::with_capacity(n);
    let mut sections = Vec::with_capacity(n);
    for m in sim.board().round(0) {
        let (list, rest) = take_u32s(&m.payload)?;
        lists.push(list);
        sections.push(rest);
    }
    let (peel, replicas_agree) = replay_everywhere(&sections, s, shared)?;
    let posted = edges_from_lists(lists.iter().enumerate().map(|(u, l)| (u as VertexId, l.as_slice())));

    let sp = |tag: &str, i: usize| SparsifierParams { seed: derive(derive_str(seed, tag), i as u64), ..Default::default() };
    let mut edges: BTreeSet<Edge> = peel.recovered.clone();
    let mut inside = vec![false; n];
    for (i, set) in cover.iter().enumerate() {
        set.iter().for_each(|&v| inside[v as usize] = true);
        let sub: BTreeSet<Edge> = posted.iter().copied().filter(|&(u, v)| inside[u as usize] && inside[v as usize]).collect();
        set.iter().for_each(|&v| inside[v as usize] = false);
        edges.extend(sparsify_on(set, &sub, &sp("scm-cover-sparsifier", i)));
    }
    let mut in_v2 = vec![false; n];
    peel.v2.iter().for_each(|&v| in_v2[v as usize] = true);
    for (i, set) in bern.iter().enumerate() {
        let kept: Vec<VertexId> = set.iter().copied().filter(|&v| in_v2[v as usize]).collect();
        kept.iter().for_each(|&v| inside[v as usize] = true);
        let sub: BTreeSet<Edge> = posted.iter().copied().filter(|&(u, v)| inside[u as usize] && inside[v as usize]).collect();
        kept.iter().for_each(|&v| inside[v as usize] = false);
        edges.extend(sparsify_on(&kept, &sub, &sp("scm-bernoulli-sparsifier", i)));
    }
    let spanner = UnweightedGraph::from_edges(n, edges)?;

    let m_v2 = g.induced(&peel.v2).m();
    let store = RegressionStore::builtin();
    let shape = Shape { n: nf, m: g.m() as f64, alpha, ..Default::default() };
    let cover_bound = store.expect("any", "scm", "stretch").bound(&shape);
    let sqrt_bound = store.expect("any", "scm", "stretch_sqrt").bound(&Shape { m: m_v2 as f64, ..shape });
    let bound = if m_v2 == 0 { 1.0 } else { cover_bound.min(sqrt_bound).max(1.0) };
    report.declared_bound = Some(bound);
    sim.meter().fill(report);
    report.metering = Metering::Mixed;
    report.note("peel_s", s);
    report.note("v1", peel.v1.len());
    report.note("v2_edges", m_v2);
    report.note("bernoulli_subsets", bern.len());
    report.note("peel_bits_per_player", sections.iter().map(|x| 8 * x.len() as u64).max().unwrap_or(0));
    report.note("replicas_agree", replicas_agree);
    Ok(ScmOutput {
        spanner,
        report: report.clone(),
        meter: sim.meter().clone(),
        peel: Some(peel),
        emptied: None,
        violations: sim.violations().len(),
    })
}

fn scm_filtering(
    g: &UnweightedGraph,
    rounds: u32,
    cover: &[Vec<VertexId>],
    seed: u64,
    report: &mut RunReport,
) -> Result<ScmOutput> {
    let n = g.n();
    let size = cover.iter().map(Vec::len).max().unwrap_or(1);
    let t = ldd_t(size, rounds).min(resistance_t(size, rounds)).max(1.0);
    let params = FilterParams::new(t, rounds, seed)?;
    let member = membership(n, cover);
    let mut cores: Vec<FilterCore> = cover.iter().map(|s| FilterCore::new(s.len(), params.hops())).collect();
    let mut sim = Simulator::new(g, derive_str(seed, "scm-shared"));
    for round in 1..=rounds {
        if cores.iter().all(|c| !c.active) {
            break;
        }
        let msgs = sim.round(|view| {
            let me = view.id();
            let nb = view.neighbors();
            let mut payload = Vec::new();
            let mut bits = 0;
            for &i in &member[me as usize] {
                let (set, core) = (&cover[i as usize], &cores[i as usize]);
                if !core.active {
                    continue;
                }
                let local: Vec<VertexId> = nb.iter().filter_map(|&w| local_id(set, w)).collect();
                let mine = local_id(set, me).expect("member of its own subset");
                payload.extend_from_slice(&i.to_le_bytes());
                put_u32s(&mut payload, &core.survivors(mine, &local));
                bits += sparsifier_share_bits(set.len());
            }
            Ok(Message::charged(payload, bits))
        })?;
        let mut per_subset: BTreeMap<u32, BTreeSet<Edge>> = BTreeMap::new();
        for (u, m) in msgs.iter().enumerate() {
            let mut rest = m.payload.as_slice();
            while !rest.is_empty() {
                let i = u32::from_le_bytes(rest.get(..4).ok_or_else(|| Error::Decode("truncated subset id".into()))?.try_into().expect("four bytes"));
                let (list, tail) = take_u32s(&rest[4..])?;
                rest = tail;
                let mine = local_id(&cover[i as usize], u as VertexId).ok_or_else(|| Error::Decode("subset id not held by player".into()))?;
                let entry = per_subset.entry(i).or_default();
                entry.extend(list.into_iter().filter(|&w| w > mine).map(|w| (mine, w)));
            }
        }
        for (i, core) in cores.iter_mut().enumerate() {
            if core.active {
                let surviving = per_subset.remove(&(i as u32)).unwrap_or_default();
                core.absorb(round, surviving, &params.sparsifier(round, i as u64 + 1), None)?;
            }
        }
    }
    let mut edges = BTreeSet::new();
    let mut residual = 0usize;
    for (set, core) in cover.iter().zip(&cores) {
        edges.extend(core.hhat.edges().map(|(a, b)| (set[a as usize], set[b as usize])));
        let local = UnweightedGraph::from_edges(
            set.len(),
            g.induced(set).edges().map(|(u, v)| (local_id(set, u).expect("inside"), local_id(set, v).expect("inside"))),
        )?;
        residual += core.residual(&local).len();
    }
    let spanner = UnweightedGraph::from_edges(n, edges)?;
    report.declared_bound = Some(t);
    report.params.t = Some(t);
    sim.meter().fill(report);
    report.metering = Metering::Charged;
    report.note("residual_edges", residual);
    Ok(ScmOutput {
        spanner,
        report: report.clone(),
        meter: sim.meter().clone(),
        peel: None,
        emptied: Some(residual == 0),
        violations: sim.violations().len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{complete, gnp, path, star};

    #[test]
    fn star_peels_completely() {
        let g = star(9);
        let out = low_degree_peeling(&g, 2, 1).unwrap();
        assert!(out.result.v2.is_empty());
        assert_eq!(out.result.v1.len(), 10);
        assert_eq!(out.result.recovered.len(), 9);
        // The center drops to degree 2 after seven leaves and has the smallest index.
        assert_eq!(out.result.v1, vec![1, 2, 3, 4, 5, 6, 7, 0, 8, 9]);
        assert_eq!(out.result, peel_oracle(&g, 2));
        assert!(out.replicas_agree);
    }

    #[test]
    fn clique_is_not_peeled() {
        let g = complete(6);
        let out = low_degree_peeling(&g, 2, 1).unwrap();
        assert!(out.result.v1.is_empty());
        assert_eq!(out.result.v2.len(), 6);
        assert!(out.result.min_degree_v2(&g).unwrap() > 2);
    }

    #[test]
    fn sparse_peel_matches_the_oracle() {
        for seed in 0..5 {
            let g = gnp(200, 0.02, seed);
            let out = low_degree_peeling(&g, 4, seed).unwrap();
            let oracle = peel_oracle(&g, 4);
            assert_eq!(out.result, oracle, "seed {seed}");
            assert!(out.result.min_degree_v2(&g).map_or(true, |d| d > 4));
            for &u in &out.result.v1 {
                for &w in g.neighbors(u) {
                    assert!(out.result.recovered.contains(&canonical(u, w)));
                }
            }
            assert_eq!(out.violations, 0);
            let longest = out.transcript.board.round(0).iter().map(|m| 8 * m.payload.len() as u64).max().unwrap();
            assert_eq!(out.meter.max_bits_per_player_per_round, longest);
        }
    }

    #[test]
    fn firewall_rejects_foreign_reads() {
        let g = path(4);
        let mut sim = Simulator::new(&g, 0);
        let err = sim.round(|view| {
            let other = (view.id() + 1) % 4;
            Ok(Message::metered(view.neighborhood_of(other)?.iter().map(|&x| x as u8).collect()))
        });
        assert!(matches!(err, Err(Error::Usage(_))));
        assert_eq!(sim.violations().len(), 1);
        assert_eq!(sim.board().rounds(), 0);
    }

    #[test]
    fn players_see_only_earlier_rounds() {
        let g = path(5);
        let mut sim = Simulator::new(&g, 3);
        sim.round(|v| {
            assert_eq!(v.board().rounds(), 0);
            Ok(Message::metered(vec![v.neighbors().len() as u8]))
        })
        .unwrap();
        sim.round(|v| {
            assert_eq!(v.board().rounds(), 1);
            let total: u32 = (0..5).map(|p| v.board().message(0, p).payload[0] as u32).sum();
            Ok(Message::charged(total.to_le_bytes().to_vec(), 100))
        })
        .unwrap();
        assert_eq!(sim.meter().round_max_bits, vec![8, 100]);
        assert_eq!(sim.meter().total_bits, 40 + 500);
        assert!(sim.violations().is_empty());
        assert_eq!(sim.accesses().len(), 5);
        let t = sim.transcript();
        let back = Transcript::from_json_lines(&t.to_json_lines(), 3).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.meter(), *sim.meter());
    }

    #[test]
    fn tree_empties_in_one_round() {
        let g = path(40);
        let out = filtering_spanner(&g, &FilterParams::new(1.0, 3, 5).unwrap()).unwrap();
        assert!(out.emptied);
        assert_eq!(out.history.len(), 2);
        assert!(out.history[1].surviving.is_empty());
        assert_eq!(out.spanner, g);
        assert!(out.report.verified);
    }

    #[test]
    fn undersampled_filtering_is_monotone_and_certified() {
        let g = gnp(120, 0.15, 7);
        let params = FilterParams::new(6.0, 4, 11).unwrap().with_oversample(0.002).unwrap();
        let out = filtering_spanner(&g, &params).unwrap();
        for w in out.history.windows(2) {
            assert!(w[1].surviving.is_subset(&w[0].surviving));
            assert!(w[1].spanner_edges >= w[0].spanner_edges);
        }
        assert!(out.history[0].sparsifier_edges < g.m());
        if out.emptied {
            assert!(out.report.max_stretch.unwrap() <= 6);
            assert!(out.report.verified);
        }
    }

    #[test]
    fn ldd_small_cases() {
        let single = WeightedGraph::<f64>::empty(1);
        let d = ldd(&single, 0.5).unwrap();
        assert_eq!(d.clusters.len(), 1);
        assert_eq!(d.clusters[0].radius, 0);
        assert!(d.certify(&single).holds());

        let s = star(6).to_weighted::<f64>();
        let d = ldd(&s, 0.99).unwrap();
        assert!(d.clusters.len() == 1 || d.clusters.len() == 7);
        assert!(d.certify(&s).holds());
    }

    #[test]
    fn ldd_on_a_sparsifier() {
        let g = gnp(150, 0.1, 2);
        let h: WeightedGraph<f64> =
            spectral_sparsify(&g, &SparsifierParams::with_seed(3).with_oversample(0.01).unwrap());
        let d = ldd(&h, 0.2).unwrap();
        let c = d.certify(&h);
        assert!(c.holds(), "{c:?}");
        assert!(d.boundary_weight <= 0.2 * d.volume + 1e-9);
    }

    #[test]
    fn scm_one_round_is_certified() {
        let g = gnp(80, 0.1, 4);
        let out = scm_tradeoff(&g, 0.5, 1, 9).unwrap();
        assert!(out.report.max_stretch.is_some());
        assert!(out.report.verified, "{}", out.report.to_json());
        assert_eq!(out.violations, 0);
        assert!(out.meter.max_bits_per_player_per_round > 0);
    }

    #[test]
    fn scm_multi_round_is_certified() {
        let g = gnp(80, 0.1, 4);
        let out = scm_tradeoff(&g, 0.5, 2, 9).unwrap();
        assert_eq!(out.emptied, Some(true));
        assert!(out.report.verified, "{}", out.report.to_json());
    }
}
