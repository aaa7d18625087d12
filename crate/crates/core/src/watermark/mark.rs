use rand::Rng as _;

use crate::bits::BitString;
use crate::graph::{Graph, VertexPair};
use crate::models::ModelParams;
use crate::rng::rng_from_seed;
use crate::separation::LabelSet;

use super::{MarkKey, WatermarkError, WatermarkId};

/// Where the probability of a key bit being 1 comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum ResampleSource {
    /// Same probability for every pair (0.5 in the experiments).
    Constant(f64),
    /// The model's edge probability. For power-law models each endpoint's
    /// degree rank in the original graph stands in for its model index.
    Model(ModelParams),
}

impl Default for ResampleSource {
    fn default() -> Self {
        ResampleSource::Constant(0.5)
    }
}

impl ResampleSource {
    fn probability(&self, rank_a: usize, rank_b: usize) -> f64 {
        match self {
            ResampleSource::Constant(p) => *p,
            ResampleSource::Model(ModelParams::ErdosRenyi(er)) => er.p(),
            ResampleSource::Model(ModelParams::PowerLaw(pl)) => {
                let top = pl.n().saturating_sub(1) as u32;
                pl.vertex_probability((rank_a as u32).min(top), (rank_b as u32).min(top))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkedCopy {
    pub id: WatermarkId,
    pub graph: Graph,
    /// Key pairs whose edge membership actually changed.
    pub changed: usize,
}

/// Mapped key pairs as graph vertex pairs.
pub(crate) fn key_vertex_pairs(key: &MarkKey, labels: &LabelSet) -> Result<Vec<VertexPair>, WatermarkError> {
    let order = labels.ordered_vertices();
    if key.max_rank() > order.len() {
        return Err(WatermarkError::RankOutOfRange { rank: key.max_rank(), labeled: order.len() });
    }
    Ok(key
        .pairs()
        .iter()
        .map(|&(u, v)| VertexPair::new(order[u - 1], order[v - 1]).expect("labeled vertices are distinct"))
        .collect())
}

/// Draw an id bit per key pair from `source` and force the pair's edge to it.
pub fn mark(
    key: &MarkKey,
    g: &Graph,
    labels: &LabelSet,
    source: &ResampleSource,
    seed: u64,
) -> Result<MarkedCopy, WatermarkError> {
    let ranks = labels.degree_ranks();
    if key.max_rank() > ranks.len() {
        return Err(WatermarkError::RankOutOfRange { rank: key.max_rank(), labeled: ranks.len() });
    }
    let mut rng = rng_from_seed(seed);
    let mut bits = BitString::zeros(key.len());
    for (j, &(u, v)) in key.pairs().iter().enumerate() {
        let p = source.probability(ranks[u - 1], ranks[v - 1]);
        if !(0.0..=1.0).contains(&p) {
            return Err(WatermarkError::Probability(p));
        }
        bits.set(j, rng.random_bool(p));
    }
    let id = WatermarkId(bits);
    let (graph, changed) = mark_with_id(key, g, labels, &id)?;
    Ok(MarkedCopy { id, graph, changed })
}

/// Mark `g` with a given id. Returns the copy and how many key pairs changed.
pub fn mark_with_id(
    key: &MarkKey,
    g: &Graph,
    labels: &LabelSet,
    id: &WatermarkId,
) -> Result<(Graph, usize), WatermarkError> {
    if id.len() != key.len() {
        return Err(WatermarkError::IdLength { expected: key.len(), got: id.len() });
    }
    let pairs = key_vertex_pairs(key, labels)?;
    let assignments: Vec<(VertexPair, bool)> = pairs.into_iter().zip(id.0.iter()).collect();
    Ok(g.with_assignments(&assignments))
}
