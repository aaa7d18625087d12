//! Undirected simple graphs over dense vertex ids.

mod distance;
mod io;

pub use distance::{edit_distance_exact, identity_distances, vertex_distance_exact, IdentityDistances, EXACT_SEARCH_CAP};
pub use io::{read_edge_list, write_edge_list, EdgeList};

use std::fmt;

use thiserror::Error;

pub type VertexId = u32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("pair ({u}, {v}) out of range for a graph on {n} vertices")]
    OutOfRange { u: VertexId, v: VertexId, n: usize },
    #[error("graphs have different vertex counts ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },
    #[error("exact search over {n}! bijections exceeds the cap of {cap} vertices; use identity_distances when the correspondence is known")]
    ExactSearchTooLarge { n: usize, cap: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Unordered vertex pair, stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexPair {
    u: VertexId,
    v: VertexId,
}

impl VertexPair {
    pub fn new(a: VertexId, b: VertexId) -> Result<Self, GraphError> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(VertexPair { u: a, v: b }),
            std::cmp::Ordering::Greater => Ok(VertexPair { u: b, v: a }),
            std::cmp::Ordering::Equal => Err(GraphError::SelfLoop(a)),
        }
    }

    pub fn u(self) -> VertexId {
        self.u
    }

    pub fn v(self) -> VertexId {
        self.v
    }

    /// Position of this pair in the row-major enumeration of all pairs of an
    /// `n`-vertex graph: (0,1), (0,2), ..., (0,n-1), (1,2), ...
    pub fn linear_index(self, n: usize) -> u64 {
        let (u, v, n) = (self.u as u64, self.v as u64, n as u64);
        u * (2 * n - u - 1) / 2 + (v - u - 1)
    }

    /// Inverse of [`VertexPair::linear_index`].
    pub fn from_linear_index(n: usize, k: u64) -> Self {
        let nn = n as u64;
        debug_assert!(k < nn * (nn.saturating_sub(1)) / 2);
        // row u starts at u(2n-u-1)/2; solve the quadratic then fix rounding
        let b = (2 * nn - 1) as f64;
        let mut u = ((b - (b * b - 8.0 * k as f64).max(0.0).sqrt()) / 2.0).floor() as u64;
        let start = |u: u64| u * (2 * nn - u - 1) / 2;
        while u > 0 && start(u) > k {
            u -= 1;
        }
        while start(u + 1) <= k {
            u += 1;
        }
        let v = k - start(u) + u + 1;
        VertexPair { u: u as VertexId, v: v as VertexId }
    }
}

impl fmt::Display for VertexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.u, self.v)
    }
}

/// Number of unordered vertex pairs on `n` vertices.
pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Immutable undirected simple graph stored as sorted neighbor lists.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<VertexId>>,
    edges: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph").field("n", &self.n()).field("edges", &self.edges).finish()
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n], edges: 0 }
    }

    /// Build a graph, canonicalizing and deduplicating the pairs.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(GraphError::OutOfRange { u: a, v: b, n });
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        Ok(Self::from_raw_adjacency(adj))
    }

    pub fn from_pairs(n: usize, pairs: &[VertexPair]) -> Result<Self, GraphError> {
        Self::from_edges(n, pairs.iter().map(|p| (p.u, p.v)))
    }

    /// Sorts and dedups every list. Lists must already be symmetric.
    pub(crate) fn from_raw_adjacency(mut adj: Vec<Vec<VertexId>>) -> Self {
        let mut total = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            total += list.len();
        }
        Graph { adj, edges: total / 2 }
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|v| (0..n as VertexId).filter(|&w| w as usize != v).collect())
            .collect();
        Graph { adj, edges: n * n.saturating_sub(1) / 2 }
    }

    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n as VertexId).map(|v| (v - 1, v))).expect("path edges are valid")
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v as usize]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        if u == v || u as usize >= self.n() || v as usize >= self.n() {
            return false;
        }
        // search the shorter list
        let (a, b) = if self.adj[u as usize].len() <= self.adj[v as usize].len() { (u, v) } else { (v, u) };
        self.adj[a as usize].binary_search(&b).is_ok()
    }

    pub fn contains(&self, p: VertexPair) -> bool {
        self.has_edge(p.u, p.v)
    }

    /// Canonical edges in increasing `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = VertexPair> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = u as VertexId;
            list.iter().filter(move |&&v| v > u).map(move |&v| VertexPair { u, v })
        })
    }

    fn check_pair(&self, p: VertexPair) -> Result<(), GraphError> {
        if p.v as usize >= self.n() {
            return Err(GraphError::OutOfRange { u: p.u, v: p.v, n: self.n() });
        }
        Ok(())
    }

    /// Toggle membership of one pair.
    pub fn flip_edge(&self, p: VertexPair) -> Result<Graph, GraphError> {
        self.check_pair(p)?;
        Ok(self.with_flips(std::iter::once(p)))
    }

    /// Toggle every pair yielded by `flips`. A pair listed twice is toggled
    /// twice. Pairs must be in range.
    pub fn with_flips<I>(&self, flips: I) -> Graph
    where
        I: IntoIterator<Item = VertexPair>,
    {
        let mut toggles: Vec<Vec<VertexId>> = vec![Vec::new(); self.n()];
        for p in flips {
            assert!((p.v as usize) < self.n(), "pair {p} out of range");
            toggles[p.u as usize].push(p.v);
            toggles[p.v as usize].push(p.u);
        }
        let mut adj = self.adj.clone();
        let mut degree_sum = 2 * self.edges;
        for (v, mut t) in toggles.into_iter().enumerate() {
            if t.is_empty() {
                continue;
            }
            t.sort_unstable();
            // cancel pairs flipped an even number of times
            let mut odd = Vec::with_capacity(t.len());
            let mut i = 0;
            while i < t.len() {
                let mut j = i;
                while j < t.len() && t[j] == t[i] {
                    j += 1;
                }
                if (j - i) % 2 == 1 {
                    odd.push(t[i]);
                }
                i = j;
            }
            let old = &self.adj[v];
            let merged = symmetric_difference(old, &odd);
            degree_sum = degree_sum + merged.len() - old.len();
            adj[v] = merged;
        }
        Graph { adj, edges: degree_sum / 2 }
    }

    /// Apply an explicit set of edge assignments: `true` inserts, `false`
    /// removes. Returns the graph and how many pairs actually changed.
    pub fn with_assignments(&self, assignments: &[(VertexPair, bool)]) -> (Graph, usize) {
        let flips: Vec<VertexPair> = assignments
            .iter()
            .filter(|&&(p, present)| self.contains(p) != present)
            .map(|&(p, _)| p)
            .collect();
        let changed = flips.len();
        (self.with_flips(flips), changed)
    }

    /// Complement graph.
    pub fn complement(&self) -> Graph {
        let n = self.n();
        let adj = (0..n)
            .map(|v| {
                let mut it = self.adj[v].iter().peekable();
                let mut out = Vec::with_capacity(n - 1 - self.adj[v].len());
                for w in 0..n as VertexId {
                    if it.peek() == Some(&&w) {
                        it.next();
                    } else if w as usize != v {
                        out.push(w);
                    }
                }
                out
            })
            .collect();
        Graph { adj, edges: pair_count(n) as usize - self.edges }
    }

    /// Pairs that are edges in exactly one of `self` and `other`, in
    /// canonical order.
    pub fn edge_difference(&self, other: &Graph) -> Result<Vec<VertexPair>, GraphError> {
        if self.n() != other.n() {
            return Err(GraphError::SizeMismatch { left: self.n(), right: other.n() });
        }
        let mut out = Vec::new();
        for u in 0..self.n() {
            for v in symmetric_difference(&self.adj[u], &other.adj[u]) {
                if v as usize > u {
                    out.push(VertexPair { u: u as VertexId, v });
                }
            }
        }
        Ok(out)
    }

    /// Relabel vertices: vertex `v` of `self` becomes `perm[v]`.
    pub fn permuted(&self, perm: &[VertexId]) -> Graph {
        assert_eq!(perm.len(), self.n());
        let mut adj = vec![Vec::new(); self.n()];
        for (v, list) in self.adj.iter().enumerate() {
            adj[perm[v] as usize] = list.iter().map(|&w| perm[w as usize]).collect();
        }
        Self::from_raw_adjacency(adj)
    }
}

/// Elements in exactly one of two sorted, deduplicated slices.
pub(crate) fn symmetric_difference(a: &[VertexId], b: &[VertexId]) -> Vec<VertexId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub(crate) fn symmetric_difference_len(a: &[VertexId], b: &[VertexId]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}
