//! Labeling of high- and medium-degree vertices.

use std::collections::HashMap;
use std::fmt;

use crate::bits::BitString;
use crate::graph::{Graph, VertexId};

use super::Thresholds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LabelMode {
    /// Fail unless the top-h degrees are distinct and every medium bit
    /// vector is unique.
    Strict,
    /// Break degree ties by the sorted neighbor-degree list, then by vertex
    /// id, and keep colliding bit vectors.
    Relaxed,
}

impl fmt::Display for LabelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelMode::Strict => "strict",
            LabelMode::Relaxed => "relaxed",
        })
    }
}

impl std::str::FromStr for LabelMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(LabelMode::Strict),
            "relaxed" => Ok(LabelMode::Relaxed),
            other => Err(format!("unknown label mode {other:?}; expected strict or relaxed")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LabelFailure {
    /// Two of the top-h vertices (or the h-th and the next one) share a degree.
    HighDegreeCollision { first: VertexId, second: VertexId, degree: usize },
    /// Two medium vertices have the same adjacency bits to the high vertices.
    BitVectorCollision { first: VertexId, second: VertexId, bits: BitString },
    NotEnoughVertices { requested: usize, available: usize },
}

impl fmt::Display for LabelFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelFailure::HighDegreeCollision { first, second, degree } => {
                write!(f, "high-degree collision: vertices {first} and {second} both have degree {degree}")
            }
            LabelFailure::BitVectorCollision { first, second, bits } => {
                write!(f, "bit-vector collision: vertices {first} and {second} both have {bits}")
            }
            LabelFailure::NotEnoughVertices { requested, available } => {
                write!(f, "asked for {requested} labeled vertices but the graph has {available}")
            }
        }
    }
}

impl std::error::Error for LabelFailure {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HighLabel {
    pub vertex: VertexId,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MediumLabel {
    pub vertex: VertexId,
    pub degree: usize,
    /// Position in the degree order, counting the high vertices.
    pub degree_rank: usize,
    /// Bit `r` is set iff the vertex is adjacent to the high vertex of rank `r`.
    pub bits: BitString,
}

/// Labeled vertices of one graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSet {
    pub mode: LabelMode,
    /// High vertices by rank.
    pub high: Vec<HighLabel>,
    /// Medium vertices sorted by bit vector (then degree rank).
    pub medium: Vec<MediumLabel>,
}

impl LabelSet {
    /// Canonical order: high vertices by rank, then medium vertices by label.
    pub fn ordered_vertices(&self) -> Vec<VertexId> {
        self.high.iter().map(|h| h.vertex).chain(self.medium.iter().map(|m| m.vertex)).collect()
    }

    /// Degree rank of each vertex in [`ordered_vertices`](Self::ordered_vertices).
    pub fn degree_ranks(&self) -> Vec<usize> {
        (0..self.high.len()).chain(self.medium.iter().map(|m| m.degree_rank)).collect()
    }

    pub fn len(&self) -> usize {
        self.high.len() + self.medium.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Degrees of `v`'s neighbors, largest first.
pub(crate) fn neighbor_degrees(g: &Graph, v: VertexId) -> Vec<u32> {
    let mut out: Vec<u32> = g.neighbors(v).iter().map(|&w| g.degree(w) as u32).collect();
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Vertices by decreasing degree, ties by id. In relaxed mode the first
/// `prefix` positions (and any vertex tied with the last of them) are
/// re-sorted with the neighbor-degree list as the secondary key.
pub(crate) fn degree_order(g: &Graph, mode: LabelMode, prefix: usize) -> Vec<VertexId> {
    let deg = g.degrees();
    let mut order: Vec<VertexId> = (0..g.n() as VertexId).collect();
    order.sort_unstable_by(|&a, &b| deg[b as usize].cmp(&deg[a as usize]).then(a.cmp(&b)));
    if mode == LabelMode::Relaxed && prefix > 0 && !order.is_empty() {
        let last = deg[order[prefix.min(order.len()) - 1] as usize];
        let end = order.partition_point(|&v| deg[v as usize] >= last);
        let mut keyed: Vec<(VertexId, Vec<u32>)> =
            order[..end].iter().map(|&v| (v, neighbor_degrees(g, v))).collect();
        keyed.sort_by(|(a, la), (b, lb)| {
            deg[*b as usize].cmp(&deg[*a as usize]).then_with(|| lb.cmp(la)).then(a.cmp(b))
        });
        for (slot, (v, _)) in order.iter_mut().zip(keyed) {
            *slot = v;
        }
    }
    order
}

/// Adjacency bits to `high` for every vertex (indexed by vertex id).
fn high_adjacency(g: &Graph, high: &[VertexId], wanted: impl Fn(VertexId) -> bool) -> HashMap<VertexId, BitString> {
    let mut out: HashMap<VertexId, BitString> = HashMap::new();
    for (r, &hv) in high.iter().enumerate() {
        for &w in g.neighbors(hv) {
            if wanted(w) {
                out.entry(w).or_insert_with(|| BitString::zeros(high.len())).set(r, true);
            }
        }
    }
    out
}

/// Label the top `thresholds.high` vertices by degree rank and the next
/// `thresholds.medium` by their adjacency to the high ones.
pub fn label(g: &Graph, thresholds: &Thresholds, mode: LabelMode) -> Result<LabelSet, LabelFailure> {
    label_counts(g, thresholds.high, thresholds.medium, mode)
}

pub(crate) fn label_counts(g: &Graph, h: usize, m: usize, mode: LabelMode) -> Result<LabelSet, LabelFailure> {
    let n = g.n();
    if h + m > n {
        return Err(LabelFailure::NotEnoughVertices { requested: h + m, available: n });
    }
    let order = degree_order(g, mode, h + m);
    let deg = |v: VertexId| g.degree(v);
    if mode == LabelMode::Strict {
        // distinct top-h degrees, and a gap to the first medium vertex
        let upto = (h + 1).min(n);
        for pair in order[..upto].windows(2) {
            if deg(pair[0]) == deg(pair[1]) {
                return Err(LabelFailure::HighDegreeCollision { first: pair[0], second: pair[1], degree: deg(pair[0]) });
            }
        }
    }
    let high_vertices = &order[..h];
    let mut rank_of = vec![usize::MAX; n];
    for (r, &v) in order[h..h + m].iter().enumerate() {
        rank_of[v as usize] = h + r;
    }
    let mut bits = high_adjacency(g, high_vertices, |w| rank_of[w as usize] != usize::MAX);
    let mut medium: Vec<MediumLabel> = order[h..h + m]
        .iter()
        .map(|&v| MediumLabel {
            vertex: v,
            degree: deg(v),
            degree_rank: rank_of[v as usize],
            bits: bits.remove(&v).unwrap_or_else(|| BitString::zeros(h)),
        })
        .collect();
    medium.sort_by(|a, b| a.bits.cmp(&b.bits).then(a.degree_rank.cmp(&b.degree_rank)));
    if mode == LabelMode::Strict {
        for pair in medium.windows(2) {
            if pair[0].bits == pair[1].bits {
                return Err(LabelFailure::BitVectorCollision {
                    first: pair[0].vertex,
                    second: pair[1].vertex,
                    bits: pair[0].bits.clone(),
                });
            }
        }
    }
    let high = high_vertices.iter().map(|&v| HighLabel { vertex: v, degree: deg(v) }).collect();
    Ok(LabelSet { mode, high, medium })
}

/// Largest medium count whose bit vectors are pairwise distinct, taking
/// vertices in relaxed degree order after the top `high`.
pub fn max_collision_free_medium(g: &Graph, high: usize) -> usize {
    let n = g.n();
    if high >= n {
        return 0;
    }
    let order = degree_order(g, LabelMode::Relaxed, n);
    let mut is_rest = vec![true; n];
    for &v in &order[..high] {
        is_rest[v as usize] = false;
    }
    let bits = high_adjacency(g, &order[..high], |w| is_rest[w as usize]);
    let zero = BitString::zeros(high);
    let mut seen = std::collections::HashSet::new();
    order[high..].iter().take_while(|v| seen.insert(bits.get(v).unwrap_or(&zero))).count()
}
