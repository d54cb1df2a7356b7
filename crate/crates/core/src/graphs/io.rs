//! Text graph format: a header line `n <count>` followed by one 1-based
//! `i j` directed edge per line. Blank lines and `#` comments are skipped.

use std::fmt::Write as _;
use std::path::Path;

use super::DirectedGraph;
use crate::error::{Error, Result};

pub fn read_graph(path: impl AsRef<Path>) -> Result<DirectedGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_graph(&text, &path.display().to_string())
}

/// Parses the text format; `origin` labels error messages.
pub fn parse_graph(text: &str, origin: &str) -> Result<DirectedGraph> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| err(1, "missing `n <count>` header".into()))?;
    let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["n", count] => count
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| err(hline, format!("bad node count `{count}`")))?,
        _ => return Err(err(hline, format!("expected `n <count>`, got `{header}`"))),
    };
    let mut edges = Vec::new();
    let mut loops = vec![false; n];
    for (line, body) in lines {
        let mut parts = body.split_whitespace();
        let mut node = |what: &str| -> Result<usize> {
            let tok = parts
                .next()
                .ok_or_else(|| err(line, format!("missing {what} node")))?;
            let v: usize = tok
                .parse()
                .map_err(|_| err(line, format!("`{tok}` is not a node label")))?;
            if v == 0 || v > n {
                return Err(err(line, format!("node {v} outside 1..={n}")));
            }
            Ok(v - 1)
        };
        let i = node("source")?;
        let j = node("target")?;
        if parts.next().is_some() {
            return Err(err(line, "trailing tokens after edge".into()));
        }
        if i == j {
            loops[i] = true;
        } else {
            edges.push((i, j));
        }
    }
    let missing = loops.iter().filter(|&&l| !l).count();
    if missing > 0 {
        log::warn!("{origin}: added {missing} missing self-loop(s)");
    }
    DirectedGraph::new(n, edges)
}

/// Renders `g` in the text format, self-loops included.
pub fn write_graph(g: &DirectedGraph) -> String {
    let mut s = format!("n {}\n", g.n());
    for (i, j) in g.edges() {
        let _ = writeln!(s, "{} {}", i + 1, j + 1);
    }
    s
}
