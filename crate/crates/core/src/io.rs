//! Plain-text formats: edge lists and partition files.
//!
//! Edge list: one `u v` pair per line, 0-indexed, `#` starts a comment, and an
//! optional `n <count>` header (otherwise `n = max index + 1`).
//!
//! Partition file: one `vertex part` pair per line.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::modularity::Partition;

/// Raw contents of an edge-list file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeList {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_index(tok: &str, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("not a vertex index: {tok:?}") })
}

pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut declared = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks.as_slice() {
            ["n", count] => {
                if declared.is_some() || !edges.is_empty() {
                    return Err(Error::Parse { line, msg: "header must precede edges".into() });
                }
                declared = Some(parse_index(count, line)?);
            }
            [u, v] => edges.push((parse_index(u, line)?, parse_index(v, line)?)),
            _ => return Err(Error::Parse { line, msg: format!("expected `u v`, got {body:?}") }),
        }
    }
    let implied = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    let n = match declared {
        Some(n) if n < implied => {
            return Err(Error::Parse { line: 0, msg: format!("header n = {n} but vertex {} used", implied - 1) })
        }
        Some(n) => n,
        None => implied,
    };
    Ok(EdgeList { n, edges })
}

pub fn read_graph(text: &str, allow_multi: bool) -> Result<Graph> {
    let list = parse_edge_list(text)?;
    Graph::from_edges(list.n, &list.edges, allow_multi)
}

/// Header comment lines, `n` header, then edges. Multigraphs get a
/// `# multigraph loops=.. multi_edges=..` annotation.
pub fn write_edge_list(g: &Graph, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        writeln!(out, "# {c}").unwrap();
    }
    if !g.is_simple() {
        writeln!(out, "# multigraph loops={} multi_edges={}", g.loop_count(), g.multi_edge_count()).unwrap();
    }
    writeln!(out, "n {}", g.n()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn parse_partition(text: &str, n: usize) -> Result<Partition> {
    let mut labels: Vec<Option<usize>> = vec![None; n];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let [v, p] = toks.as_slice() else {
            return Err(Error::Parse { line, msg: format!("expected `vertex part`, got {body:?}") });
        };
        let (v, p) = (parse_index(v, line)?, parse_index(p, line)?);
        if v >= n {
            return Err(Error::Parse { line, msg: format!("vertex {v} outside [0, {n})") });
        }
        if labels[v].replace(p).is_some() {
            return Err(Error::Parse { line, msg: format!("vertex {v} assigned twice") });
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(v, p)| p.ok_or_else(|| Error::InvalidPartition(format!("vertex {v} unassigned"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Partition::from_labels(&labels))
}

pub fn write_partition(p: &Partition) -> String {
    let mut out = String::new();
    for (v, part) in p.part_of().iter().enumerate() {
        writeln!(out, "{v} {part}").unwrap();
    }
    out
}
