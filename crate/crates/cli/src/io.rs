//! Plain-text graph formats.
//!
//! Edge lists: the first non-comment line is the vertex count `n`, every
//! following non-empty line is `u v` for the arc `u -> v`. Lines starting
//! with `#` are comments.

use std::collections::HashSet;
use std::fmt::Write as _;

use qkforge_core::{Digraph, Vertex, VertexSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

pub fn parse_edge_list(text: &str) -> Result<Digraph, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or_else(|| err(1, "missing vertex count"))?;
    let n: usize = header
        .parse()
        .map_err(|_| err(header_line, format!("expected a vertex count, found `{header}`")))?;
    Digraph::empty(n).map_err(|e| err(header_line, e.to_string()))?;

    let mut arcs: Vec<(Vertex, Vertex)> = Vec::new();
    let mut seen = HashSet::new();
    for (line, text) in lines {
        let fields: Vec<&str> = text.split_whitespace().collect();
        let [u, v] = fields[..] else {
            return Err(err(line, format!("expected `u v`, found `{text}`")));
        };
        let parse = |s: &str| s.parse::<Vertex>().map_err(|_| err(line, format!("`{s}` is not a vertex id")));
        let (u, v) = (parse(u)?, parse(v)?);
        if let Some(w) = [u, v].into_iter().find(|&w| w >= n) {
            return Err(err(line, format!("vertex {w} out of range (n = {n})")));
        }
        if u == v {
            return Err(err(line, format!("self-loop at vertex {u}")));
        }
        if !seen.insert((u, v)) {
            return Err(err(line, format!("duplicate arc {u} -> {v}")));
        }
        arcs.push((u, v));
    }
    Digraph::from_arcs(n, &arcs).map_err(|e| err(header_line, e.to_string()))
}

pub fn to_edge_list(d: &Digraph) -> String {
    let mut out = format!("{}\n", d.n());
    for (u, v) in d.arcs() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// DOT rendering; members of `marked` are drawn filled, `labels` adds a second
/// label line per vertex.
pub fn to_dot(d: &Digraph, marked: VertexSet, labels: &[(Vertex, String)]) -> String {
    let mut out = String::from("digraph G {\n  node [shape=circle];\n");
    for v in 0..d.n() {
        let extra = labels
            .iter()
            .filter(|(w, _)| *w == v)
            .map(|(_, l)| format!("\\n{l}"))
            .collect::<String>();
        let style = if marked.contains(v) {
            ", style=filled, fillcolor=black, fontcolor=white"
        } else {
            ""
        };
        let _ = writeln!(out, "  {v} [label=\"{v}{extra}\"{style}];");
    }
    for (u, v) in d.arcs() {
        let _ = writeln!(out, "  {u} -> {v};");
    }
    out.push_str("}\n");
    out
}
