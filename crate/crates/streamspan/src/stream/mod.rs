//! Replayable dynamic edge streams, pass accounting and space metering.
//!
//! Algorithms never see the event list directly: they open passes through a
//! [`StreamEngine`], which counts every physical pass and records the words
//! of state retained at each pass boundary.

use crate::error::{Error, Result};
use crate::graph::io::{content_lines, parse_header, parse_vertex};
use crate::graph::{canonical, Edge, UnweightedGraph, VertexId};
use std::cell::{Cell, RefCell};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Insert,
    Delete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UpdateEvent {
    pub op: Op,
    pub edge: Edge,
}

impl UpdateEvent {
    pub fn insert(u: VertexId, v: VertexId) -> Self {
        UpdateEvent { op: Op::Insert, edge: canonical(u, v) }
    }

    pub fn delete(u: VertexId, v: VertexId) -> Self {
        UpdateEvent { op: Op::Delete, edge: canonical(u, v) }
    }

    /// `+1` for insertions, `-1` for deletions.
    #[inline]
    pub fn delta(&self) -> i64 {
        match self.op {
            Op::Insert => 1,
            Op::Delete => -1,
        }
    }
}

/// Immutable, validated event sequence over a fixed vertex set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamSource {
    n: usize,
    events: Arc<[UpdateEvent]>,
}

impl StreamSource {
    /// Validates that every insertion targets an absent edge and every
    /// deletion a present one.
    pub fn new(n: usize, events: Vec<UpdateEvent>) -> Result<Self> {
        let mut live: BTreeSet<Edge> = BTreeSet::new();
        for (i, ev) in events.iter().enumerate() {
            let (u, v) = ev.edge;
            if u as usize >= n || v as usize >= n {
                return Err(Error::VertexOutOfRange { vertex: u.max(v) as u64, n });
            }
            if u >= v {
                return Err(Error::InvalidStream(format!("event {i}: pair ({u}, {v}) is not canonical")));
            }
            let ok = match ev.op {
                Op::Insert => live.insert(ev.edge),
                Op::Delete => live.remove(&ev.edge),
            };
            if !ok {
                return Err(Error::InvalidStream(format!(
                    "event {i}: {:?} of ({u}, {v}) is inconsistent with the live edge set",
                    ev.op
                )));
            }
        }
        Ok(StreamSource { n, events: events.into() })
    }

    /// Insert-only stream of `g`'s edges in canonical order.
    pub fn from_graph(g: &UnweightedGraph) -> Self {
        StreamSource { n: g.n(), events: g.edges().map(|(u, v)| UpdateEvent::insert(u, v)).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Raw events, for generators and oracles. Algorithms go through a
    /// [`StreamEngine`].
    pub fn events(&self) -> &[UpdateEvent] {
        &self.events
    }

    /// Final graph after applying every event.
    pub fn materialize(&self) -> UnweightedGraph {
        let mut live = BTreeSet::new();
        for ev in self.events.iter() {
            match ev.op {
                Op::Insert => live.insert(ev.edge),
                Op::Delete => live.remove(&ev.edge),
            };
        }
        UnweightedGraph::from_edges(self.n, live).expect("validated stream")
    }

    /// Parses the stream file format: `n <N>`, then `+ u v` / `- u v` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (lineno, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty stream file".into() })?;
        let n = parse_header(header, lineno)?;
        let mut events = Vec::new();
        for (lineno, line) in lines {
            let mut parts = line.split_whitespace();
            let op = match parts.next() {
                Some("+") => Op::Insert,
                Some("-") => Op::Delete,
                other => {
                    return Err(Error::Parse { line: lineno, msg: format!("expected `+` or `-`, found {other:?}") })
                }
            };
            let u = parse_vertex(parts.next(), lineno)?;
            let v = parse_vertex(parts.next(), lineno)?;
            if parts.next().is_some() {
                return Err(Error::Parse { line: lineno, msg: "trailing tokens".into() });
            }
            if u == v {
                return Err(Error::Parse { line: lineno, msg: "self-loop".into() });
            }
            events.push(UpdateEvent { op, edge: canonical(u, v) });
        }
        Self::new(n, events)
    }

    pub fn format(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for ev in self.events.iter() {
            let sign = if ev.op == Op::Insert { '+' } else { '-' };
            let _ = writeln!(out, "{sign} {} {}", ev.edge.0, ev.edge.1);
        }
        out
    }
}

/// Pass boundary record: pass index and words retained after it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    pub pass: u64,
    pub words: u64,
}

/// Metered access to a stream. Passes cannot nest; the pass count and the
/// peak retained words are the figures reported for an algorithm run.
#[derive(Debug)]
pub struct StreamEngine<'a> {
    src: &'a StreamSource,
    passes: Cell<u64>,
    open: Cell<bool>,
    peak_words: Cell<u64>,
    log: RefCell<Vec<Checkpoint>>,
}

/// An open pass; iterating yields the events in order. Dropping it closes
/// the pass.
pub struct Pass<'e, 'a> {
    engine: &'e StreamEngine<'a>,
    pos: usize,
}

impl<'e, 'a> Iterator for Pass<'e, 'a> {
    type Item = &'a UpdateEvent;

    fn next(&mut self) -> Option<Self::Item> {
        let src: &'a StreamSource = self.engine.src;
        let ev = src.events.get(self.pos)?;
        self.pos += 1;
        Some(ev)
    }
}

impl Drop for Pass<'_, '_> {
    fn drop(&mut self) {
        self.engine.open.set(false);
    }
}

impl<'a> StreamEngine<'a> {
    pub fn new(src: &'a StreamSource) -> Self {
        StreamEngine { src, passes: Cell::new(0), open: Cell::new(false), peak_words: Cell::new(0), log: RefCell::new(Vec::new()) }
    }

    pub fn n(&self) -> usize {
        self.src.n
    }

    pub fn open_pass(&self) -> Result<Pass<'_, 'a>> {
        if self.open.get() {
            return Err(Error::Usage("a pass is already open; passes cannot nest".into()));
        }
        self.open.set(true);
        self.passes.set(self.passes.get() + 1);
        Ok(Pass { engine: self, pos: 0 })
    }

    /// One pass feeding `consumer` every event in order.
    pub fn run_pass<F: FnMut(&UpdateEvent) -> Result<()>>(&self, mut consumer: F) -> Result<()> {
        for ev in self.open_pass()? {
            consumer(ev)?;
        }
        Ok(())
    }

    /// One physical pass shared by several pipeline stages; each event is
    /// delivered to the stages in order before the next event.
    pub fn run_fused(&self, stages: &mut [&mut dyn FnMut(&UpdateEvent) -> Result<()>]) -> Result<()> {
        for ev in self.open_pass()? {
            for stage in stages.iter_mut() {
                stage(ev)?;
            }
        }
        Ok(())
    }

    /// Records the words retained at a pass boundary.
    pub fn checkpoint(&self, words: u64) {
        if words > self.peak_words.get() {
            self.peak_words.set(words);
        }
        self.log.borrow_mut().push(Checkpoint { pass: self.passes.get(), words });
    }

    pub fn passes(&self) -> u64 {
        self.passes.get()
    }

    pub fn peak_words(&self) -> u64 {
        self.peak_words.get()
    }

    pub fn checkpoints(&self) -> Vec<Checkpoint> {
        self.log.borrow().clone()
    }
}
