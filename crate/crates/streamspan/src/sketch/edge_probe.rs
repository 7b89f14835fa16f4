use super::{L0Outcome, L0Sketch, LinearSketch, SketchSeed, SparseDecode, SparseRecoverySketch};
use crate::error::{Error, Result};
use crate::graph::{canonical, Edge, VertexId};

/// Coordinate of the canonical pair `(min, max)` in the `n²` pair space.
#[inline]
pub fn pair_index(n: usize, u: VertexId, v: VertexId) -> u64 {
    let (a, b) = canonical(u, v);
    a as u64 * n as u64 + b as u64
}

#[inline]
pub fn pair_from_index(n: usize, idx: u64) -> Edge {
    ((idx / n as u64) as VertexId, (idx % n as u64) as VertexId)
}

/// Which recovery guarantee an [`EdgeProbeSketch`] provides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeProbeMode {
    /// One crossing edge via an ℓ0-sampler.
    Single,
    /// Every crossing edge, up to the given count, via sparse recovery.
    All(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Inner {
    Single(L0Sketch),
    All(SparseRecoverySketch),
}

/// Result of [`EdgeProbeSketch::edge_between`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeProbe {
    Edge(Edge),
    None,
    Fail,
}

/// Sketch of the indicator vector of `E ∩ (A × B)` over the pair space,
/// using the `min·n + max` encoding.
///
/// A probe built with [`EdgeProbeSketch::routed`] has implicit sides: the
/// caller decides which edges cross and feeds only those.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeProbeSketch {
    n: usize,
    sides: Option<(Vec<VertexId>, Vec<VertexId>)>,
    inner: Inner,
}

impl EdgeProbeSketch {
    pub fn new(n: usize, mut a: Vec<VertexId>, mut b: Vec<VertexId>, mode: EdgeProbeMode, seed: SketchSeed) -> Result<Self> {
        a.sort_unstable();
        a.dedup();
        b.sort_unstable();
        b.dedup();
        if let Some(&x) = a.iter().chain(&b).find(|&&x| x as usize >= n) {
            return Err(Error::VertexOutOfRange { vertex: x as u64, n });
        }
        if a.iter().any(|x| b.binary_search(x).is_ok()) {
            return Err(Error::Parameter("edge-probe sides must be disjoint".into()));
        }
        let mut sk = Self::routed(n, mode, seed);
        sk.sides = Some((a, b));
        Ok(sk)
    }

    pub fn routed(n: usize, mode: EdgeProbeMode, seed: SketchSeed) -> Self {
        let dim = (n as u64 * n as u64).max(1);
        let inner = match mode {
            EdgeProbeMode::Single => Inner::Single(L0Sketch::new(dim, seed)),
            EdgeProbeMode::All(m) => Inner::All(SparseRecoverySketch::new(dim, m.max(1), seed)),
        };
        EdgeProbeSketch { n, sides: None, inner }
    }

    /// True if `(u, v)` has one endpoint on each side (always true for a
    /// routed probe).
    pub fn crosses(&self, u: VertexId, v: VertexId) -> bool {
        match &self.sides {
            None => true,
            Some((a, b)) => {
                let ina = |x: VertexId| a.binary_search(&x).is_ok();
                let inb = |x: VertexId| b.binary_search(&x).is_ok();
                (ina(u) && inb(v)) || (ina(v) && inb(u))
            }
        }
    }

    /// Feeds an edge update; non-crossing edges are ignored. Returns whether
    /// the update was applied.
    pub fn update_edge(&mut self, u: VertexId, v: VertexId, delta: i64) -> Result<bool> {
        if !self.crosses(u, v) {
            return Ok(false);
        }
        let idx = pair_index(self.n, u, v);
        match &mut self.inner {
            Inner::Single(s) => s.update(idx, delta)?,
            Inner::All(s) => s.update(idx, delta)?,
        }
        Ok(true)
    }

    /// A crossing edge (the smallest certified one), `None`, or `Fail`.
    pub fn edge_between(&self) -> EdgeProbe {
        match &self.inner {
            Inner::Single(s) => match s.sample() {
                L0Outcome::Sample { index, .. } => EdgeProbe::Edge(pair_from_index(self.n, index)),
                L0Outcome::Empty => EdgeProbe::None,
                L0Outcome::Fail => EdgeProbe::Fail,
            },
            Inner::All(s) => match s.decode() {
                SparseDecode::Exact(v) if v.is_empty() => EdgeProbe::None,
                SparseDecode::Exact(v) => EdgeProbe::Edge(pair_from_index(self.n, v[0].0)),
                SparseDecode::Overflow => EdgeProbe::Fail,
            },
        }
    }

    /// Every crossing edge, or `None` on overflow. Requires `All` mode.
    pub fn edges_between(&self) -> Result<Option<Vec<Edge>>> {
        match &self.inner {
            Inner::Single(_) => Err(Error::Parameter("edges_between needs a probe built in All mode".into())),
            Inner::All(s) => Ok(match s.decode() {
                SparseDecode::Exact(v) => Some(v.into_iter().map(|(i, _)| pair_from_index(self.n, i)).collect()),
                SparseDecode::Overflow => None,
            }),
        }
    }

    pub fn merge(&mut self, other: &Self) -> Result<()> {
        match (&mut self.inner, &other.inner) {
            (Inner::Single(a), Inner::Single(b)) => a.merge(b),
            (Inner::All(a), Inner::All(b)) => a.merge(b),
            _ => Err(Error::IncompatibleSketch("edge probes of different modes".into())),
        }
    }

    pub fn words(&self) -> u64 {
        match &self.inner {
            Inner::Single(s) => s.words(),
            Inner::All(s) => s.words(),
        }
    }
}
