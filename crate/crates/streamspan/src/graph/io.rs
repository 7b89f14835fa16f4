//! Graph text format: a header line `n <N>`, then one `u v` pair per line.
//! Lines starting with `#` and blank lines are ignored.

use super::{UnweightedGraph, VertexId};
use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Reads the `n <N>` header shared by graph and stream files.
pub(crate) fn parse_header(line: &str, lineno: usize) -> Result<usize> {
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some("n"), Some(v), None) => v
            .parse()
            .map_err(|_| Error::Parse { line: lineno, msg: format!("bad vertex count `{v}`") }),
        _ => Err(Error::Parse { line: lineno, msg: "expected header `n <N>`".into() }),
    }
}

pub(crate) fn parse_vertex(tok: Option<&str>, lineno: usize) -> Result<VertexId> {
    let tok = tok.ok_or_else(|| Error::Parse { line: lineno, msg: "missing vertex".into() })?;
    tok.parse().map_err(|_| Error::Parse { line: lineno, msg: format!("bad vertex `{tok}`") })
}

/// Meaningful lines with their 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_graph(text: &str) -> Result<UnweightedGraph> {
    let mut lines = content_lines(text);
    let (lineno, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty graph file".into() })?;
    let n = parse_header(header, lineno)?;
    let mut edges = Vec::new();
    for (lineno, line) in lines {
        let mut parts = line.split_whitespace();
        let u = parse_vertex(parts.next(), lineno)?;
        let v = parse_vertex(parts.next(), lineno)?;
        if parts.next().is_some() {
            return Err(Error::Parse { line: lineno, msg: "trailing tokens".into() });
        }
        edges.push((u, v));
    }
    UnweightedGraph::from_edges(n, edges)
}

pub fn format_graph(g: &UnweightedGraph) -> String {
    let mut out = format!("n {}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}
