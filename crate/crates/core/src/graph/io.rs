//! SNAP-style edge lists: `#` comments, one `u v` pair per line, either
//! orientation, duplicates allowed.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{Graph, GraphError, VertexId};

/// A parsed edge list together with the file's original vertex ids.
#[derive(Clone, Debug)]
pub struct EdgeList {
    pub graph: Graph,
    /// `original_ids[v]` is the id vertex `v` carried in the file.
    pub original_ids: Vec<u64>,
}

/// Reads `# Nodes: N` (any case), as written by SNAP and by [`write_edge_list`].
fn declared_nodes(comment: &str) -> Option<usize> {
    let lower = comment.to_ascii_lowercase();
    let rest = lower.split("nodes:").nth(1)?;
    rest.split_whitespace().next()?.parse().ok()
}

/// Parse an edge list.
///
/// Ids are renumbered densely in first-seen order. The exception is a file
/// whose `# nodes: N` header covers every id it uses: ids are then kept
/// verbatim and vertices that never appear stay as isolated vertices, so our
/// own files round-trip exactly.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<EdgeList, GraphError> {
    let mut declared = None;
    let mut raw: Vec<(u64, u64, usize)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if declared.is_none() {
                declared = declared_nodes(comment);
            }
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next_id = || -> Result<u64, GraphError> {
            let tok = tokens.next().ok_or_else(|| GraphError::Parse {
                line: lineno,
                message: "expected two vertex ids".into(),
            })?;
            tok.parse::<u64>().map_err(|_| GraphError::Parse {
                line: lineno,
                message: format!("non-integer token {tok:?}"),
            })
        };
        let (a, b) = (next_id()?, next_id()?);
        if let Some(extra) = tokens.next() {
            return Err(GraphError::Parse { line: lineno, message: format!("unexpected token {extra:?}") });
        }
        if a == b {
            return Err(GraphError::Parse { line: lineno, message: format!("self-loop at vertex {a}") });
        }
        raw.push((a, b, lineno));
    }

    let verbatim = declared
        .filter(|&n| n <= VertexId::MAX as usize && raw.iter().all(|&(a, b, _)| a < n as u64 && b < n as u64));
    let (n, original_ids, edges) = match verbatim {
        Some(n) => {
            let edges: Vec<(VertexId, VertexId)> = raw.iter().map(|&(a, b, _)| (a as VertexId, b as VertexId)).collect();
            (n, (0..n as u64).collect(), edges)
        }
        None => {
            let mut map: HashMap<u64, VertexId> = HashMap::new();
            let mut ids = Vec::new();
            let mut intern = |x: u64| {
                *map.entry(x).or_insert_with(|| {
                    ids.push(x);
                    (ids.len() - 1) as VertexId
                })
            };
            let edges: Vec<(VertexId, VertexId)> = raw.iter().map(|&(a, b, _)| (intern(a), intern(b))).collect();
            (ids.len(), ids, edges)
        }
    };
    let graph = Graph::from_edges(n, edges)?;
    Ok(EdgeList { graph, original_ids })
}

/// Write `g` as an edge list with a `# nodes:` header, one canonical pair
/// per line in increasing order.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<(), GraphError> {
    let io = |e: std::io::Error| GraphError::Io(e.to_string());
    writeln!(out, "# nodes: {} edges: {}", g.n(), g.edge_count()).map_err(io)?;
    for p in g.edges() {
        writeln!(out, "{} {}", p.u(), p.v()).map_err(io)?;
    }
    out.flush().map_err(io)
}
