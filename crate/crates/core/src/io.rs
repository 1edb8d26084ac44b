//! Text and JSON formats.
//!
//! Edge lists: a header line `n m`, then `m` lines `u v` with `0 <= u, v < n`.
//! Blank lines and anything after `#` are ignored.
//!
//! Property specs: `{"family": [...], "removal": {"delta": .., "M": .., "n0": ..}}`
//! where each family item is an edge-list path (relative to the spec file),
//! a graph name such as `K3`, `P4`, `C5`, `E2` or `K3,3`, or an inline
//! `{"n": .., "edges": [[u, v], ...]}` object.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::error::{invalid, Error, Result};
use crate::estimator::{PropertySpec, RemovalConstants};
use crate::graph::Graph;

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn numbers(line: usize, text: &str) -> Result<Vec<usize>> {
    text.split_whitespace()
        .map(|t| t.parse::<usize>().or_else(|_| parse_err(line, format!("expected a non-negative integer, got {t:?}"))))
        .collect()
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let Some((hl, header)) = lines.next() else {
        return parse_err(1, "missing header `n m`");
    };
    let h = numbers(hl, header)?;
    let [n, m] = h[..] else {
        return parse_err(hl, "header must be `n m`");
    };
    let mut g = Graph::empty(n);
    let mut seen = 0;
    for (line, l) in lines {
        let e = numbers(line, l)?;
        let [u, v] = e[..] else {
            return parse_err(line, "edge line must be `u v`");
        };
        if u >= n || v >= n {
            return parse_err(line, format!("vertex out of range 0..{n}"));
        }
        if u == v {
            return parse_err(line, "loops are not allowed");
        }
        if g.has_edge(u, v) {
            return parse_err(line, format!("duplicate edge {u} {v}"));
        }
        seen += 1;
        if seen > m {
            return parse_err(line, format!("more than the {m} edges declared"));
        }
        g.set(u, v, true);
    }
    if seen != m {
        return parse_err(hl, format!("header declares {m} edges, found {seen}"));
    }
    Ok(g)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut s = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}

/// `Kn`, `En` (edgeless), `Pn`, `Cn`, `Ka,b`.
pub fn named_graph(name: &str) -> Option<Graph> {
    let name = name.trim();
    let (kind, rest) = name.split_at_checked(1)?;
    if let Some((a, b)) = rest.split_once(',') {
        let (a, b) = (a.parse().ok()?, b.parse().ok()?);
        return (kind == "K").then(|| Graph::complete_bipartite(a, b));
    }
    let n: usize = rest.parse().ok()?;
    match kind {
        "K" => Some(Graph::complete(n)),
        "E" => Some(Graph::empty(n)),
        "P" => Some(Graph::path(n)),
        "C" if n >= 3 => Some(Graph::cycle(n)),
        _ => None,
    }
}

/// Reads an edge list, or a graph JSON object if the file starts with `{`.
pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        Ok(serde_json::from_str(&text)?)
    } else {
        parse_edge_list(&text)
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

#[derive(Deserialize)]
struct SpecFile {
    family: Vec<Value>,
    #[serde(default)]
    removal: Option<RemovalConstants>,
}

/// Parses a property spec; relative paths resolve against `base`.
pub fn parse_spec(text: &str, base: &Path) -> Result<PropertySpec> {
    let raw: SpecFile = serde_json::from_str(text)?;
    let mut family = Vec::with_capacity(raw.family.len());
    for (i, item) in raw.family.into_iter().enumerate() {
        let g = match item {
            Value::String(s) => match named_graph(&s) {
                Some(g) => g,
                None => read_graph(&base.join(&s))?,
            },
            v @ Value::Object(_) => serde_json::from_value(v)?,
            other => return invalid(format!("family item {i} must be a path, a name or a graph object, got {other}")),
        };
        family.push(g);
    }
    PropertySpec::new(family, raw.removal)
}

pub fn read_spec(path: &Path) -> Result<PropertySpec> {
    let text = read_text(path)?;
    parse_spec(&text, path.parent().unwrap_or(Path::new(".")))
}
