//! (d, d′)-separation checks and degree concentration diagnostics.

use rayon::prelude::*;

use crate::graph::{Graph, VertexId};
use crate::kv::KvBlock;
use crate::models::PowerLawParams;

use super::label::{label_counts, LabelMode};
use super::{LabelFailure, Thresholds};

/// A pair attaining a minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witness {
    pub first: VertexId,
    pub second: VertexId,
    pub value: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    pub degree_gap_target: f64,
    pub neighborhood_target: f64,
    /// Smallest degree gap between consecutive vertices in the top h + 1.
    pub min_degree_gap: Option<Witness>,
    /// Smallest neighborhood distance over medium pairs.
    pub min_neighborhood_distance: Option<Witness>,
}

impl SeparationReport {
    pub fn high_separated(&self) -> bool {
        self.min_degree_gap.is_none_or(|w| w.value as f64 >= self.degree_gap_target)
    }

    pub fn medium_separated(&self) -> bool {
        self.min_neighborhood_distance.is_none_or(|w| w.value as f64 >= self.neighborhood_target)
    }

    pub fn separated(&self) -> bool {
        self.high_separated() && self.medium_separated()
    }

    pub fn to_kv(&self) -> KvBlock {
        let mut kv = KvBlock::default();
        kv.insert("separated", self.separated());
        kv.insert("high_separated", self.high_separated());
        kv.insert("medium_separated", self.medium_separated());
        kv.insert("d", self.degree_gap_target);
        kv.insert("d_prime", self.neighborhood_target);
        for (key, w) in [("min_degree_gap", self.min_degree_gap), ("min_neighborhood_distance", self.min_neighborhood_distance)] {
            match w {
                Some(w) => {
                    kv.insert(key, w.value);
                    kv.insert(&format!("{key}_pair"), format!("{},{}", w.first, w.second));
                }
                None => kv.insert(key, "none"),
            }
        }
        kv
    }
}

/// Number of vertices in `high` adjacent to exactly one of `u` and `v`.
pub fn neighborhood_distance(g: &Graph, u: VertexId, v: VertexId, high: &[VertexId]) -> usize {
    high.iter().filter(|&&k| g.has_edge(u, k) != g.has_edge(v, k)).count()
}

/// Check the degree classes of `thresholds` against its targets `d` and
/// `d′`. Classes come from the degree order with ties broken by id; the
/// degree gap check includes the first vertex after the high class.
pub fn check_separation(g: &Graph, thresholds: &Thresholds) -> Result<SeparationReport, LabelFailure> {
    let (h, m) = (thresholds.high, thresholds.medium);
    let labels = label_counts(g, h, m, LabelMode::Relaxed)?;
    let mut order: Vec<VertexId> = (0..g.n() as VertexId).collect();
    order.sort_unstable_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b)));
    let min_degree_gap = order[..(h + 1).min(g.n())]
        .windows(2)
        .map(|p| Witness { first: p[0], second: p[1], value: g.degree(p[0]) - g.degree(p[1]) })
        .min_by_key(|w| w.value);

    let medium = &labels.medium;
    let min_neighborhood_distance = (0..medium.len())
        .into_par_iter()
        .filter_map(|i| {
            medium[i + 1..]
                .iter()
                .map(|b| (medium[i].bits.hamming_unchecked(&b.bits), b.vertex))
                .min_by_key(|&(d, _)| d)
                .map(|(d, other)| {
                    let (first, second) = (medium[i].vertex.min(other), medium[i].vertex.max(other));
                    Witness { first, second, value: d }
                })
        })
        .min_by_key(|w| (w.value, w.first, w.second));

    Ok(SeparationReport {
        degree_gap_target: thresholds.degree_gap,
        neighborhood_target: thresholds.neighborhood_gap,
        min_degree_gap,
        min_neighborhood_distance,
    })
}

/// Length of the run of top-degree vertices whose degree no other vertex
/// shares.
pub fn unique_degree_prefix(g: &Graph) -> usize {
    let mut deg = g.degrees();
    deg.sort_unstable_by(|a, b| b.cmp(a));
    let mut count = 0;
    let mut i = 0;
    while i < deg.len() {
        let run = deg[i..].iter().take_while(|&&d| d == deg[i]).count();
        if run > 1 {
            break;
        }
        count += 1;
        i += run;
    }
    count
}

/// One high-index vertex of a power-law sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationRow {
    pub vertex: VertexId,
    pub index: f64,
    pub degree: usize,
    pub expected: f64,
    pub half_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationReport {
    pub epsilon: f64,
    pub rows: Vec<ConcentrationRow>,
}

impl ConcentrationReport {
    /// Whether every row has `|deg − w_i| < ε δ_i`.
    pub fn all_within(&self) -> bool {
        self.rows.iter().all(|r| (r.degree as f64 - r.expected).abs() < self.epsilon * r.half_gap)
    }
}

/// Degrees of the vertices with index `i ≤ limit` against their expected
/// degree `w_i` and half gap `δ_i`. Vertex `k` of a sample from `params`
/// has index `i₀ + k`.
pub fn degree_concentration(g: &Graph, params: &PowerLawParams, epsilon: f64, limit: f64) -> ConcentrationReport {
    let rows = (0..g.n().min(params.n()) as VertexId)
        .map(|k| (k, params.index_of(k)))
        .take_while(|&(_, i)| i <= limit)
        .map(|(k, i)| ConcentrationRow {
            vertex: k,
            index: i,
            degree: g.degree(k),
            expected: params.weight(i),
            half_gap: params.half_gap(i),
        })
        .collect();
    ConcentrationReport { epsilon, rows }
}
