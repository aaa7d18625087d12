//! Random graph models: G(n, p) and the random power-law graph G(w^γ).
//!
//! Power-law vertices are indexed by weight rank. The model's index range
//! starts at a real offset `i₀`; internal vertex `k` carries the real index
//! `i₀ + k`, so vertex 0 has the largest expected degree.

use std::fmt;

use rand::Rng as _;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::kv::{KvBlock, KvError};
use crate::rng::stream_rng;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("edge probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("exponent gamma = {0} must lie in (5/2, 3)")]
    GammaOutOfRange(f64),
    #[error("need m > w > 0, got m = {m}, w = {w}")]
    Degrees { m: f64, w: f64 },
    #[error("need at least one vertex")]
    NoVertices,
    #[error("P[i0, i0] = {0:.4} >= 1: the highest-weight pair would be certain (lower m or raise n)")]
    TopPairProbability(f64),
    #[error("index {index} outside the model range [{low}, {high}]")]
    IndexOutOfRange { index: f64, low: f64, high: f64 },
    #[error("unknown model {0:?}; expected er or plg")]
    UnknownModel(String),
    #[error(transparent)]
    Config(#[from] KvError),
}

/// Non-fatal parameter diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelWarning {
    /// `max_i w_i^2 < sum_k w_k` fails for the weight sequence.
    WeightCondition { max_weight_sq: f64, weight_sum: f64 },
    /// `P[i0, i0] >= 1`; probabilities are clamped to 1.
    ProbabilityClamped { top_pair: f64 },
}

impl fmt::Display for ModelWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelWarning::WeightCondition { max_weight_sq, weight_sum } => write!(
                f,
                "max weight squared {max_weight_sq:.1} is not below the weight sum {weight_sum:.1}"
            ),
            ModelWarning::ProbabilityClamped { top_pair } => {
                write!(f, "P[i0, i0] = {top_pair:.4} >= 1; edge probabilities are clamped to 1")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErdosRenyiParams {
    n: usize,
    p: f64,
}

impl ErdosRenyiParams {
    pub fn new(n: usize, p: f64) -> Result<Self, ModelError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ModelError::Probability(p));
        }
        Ok(ErdosRenyiParams { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawParams {
    n: usize,
    m: f64,
    w: f64,
    gamma: f64,
    c: f64,
    i0: f64,
    k0: f64,
    top_pair: f64,
}

impl PowerLawParams {
    /// Derive `c`, `i₀` and `K₀`, rejecting parameter sets where the
    /// highest-weight pair would have probability at least 1.
    pub fn derive(n: usize, m: f64, w: f64, gamma: f64) -> Result<Self, ModelError> {
        let params = Self::derive_clamped(n, m, w, gamma)?;
        if params.top_pair >= 1.0 {
            return Err(ModelError::TopPairProbability(params.top_pair));
        }
        Ok(params)
    }

    /// Like [`PowerLawParams::derive`] but accepts `P[i₀, i₀] >= 1`, in which
    /// case edge probabilities saturate at 1. See [`PowerLawParams::warnings`].
    pub fn derive_clamped(n: usize, m: f64, w: f64, gamma: f64) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::NoVertices);
        }
        if !(gamma > 2.5 && gamma < 3.0) {
            return Err(ModelError::GammaOutOfRange(gamma));
        }
        if !(w > 0.0 && m > w) {
            return Err(ModelError::Degrees { m, w });
        }
        let nf = n as f64;
        let ratio = (gamma - 2.0) / (gamma - 1.0);
        let c = ratio * w * nf.powf(1.0 / (gamma - 1.0));
        let i0 = nf * (w * (gamma - 2.0) / (m * (gamma - 1.0))).powf(gamma - 1.0);
        let k0 = ratio * ratio * w;
        let mut params = PowerLawParams { n, m, w, gamma, c, i0, k0, top_pair: 0.0 };
        params.top_pair = params.raw_probability(i0, i0);
        Ok(params)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn max_degree(&self) -> f64 {
        self.m
    }
    pub fn average_degree(&self) -> f64 {
        self.w
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    /// Weight scale `c`.
    pub fn c(&self) -> f64 {
        self.c
    }
    /// Lowest (real-valued) index `i₀`.
    pub fn i0(&self) -> f64 {
        self.i0
    }
    /// Probability constant `K₀`.
    pub fn k0(&self) -> f64 {
        self.k0
    }
    /// Unclamped `P[i₀, i₀]`.
    pub fn top_pair_probability(&self) -> f64 {
        self.top_pair
    }

    /// Exponent constant Γ of the medium-degree threshold.
    pub fn big_gamma(&self) -> f64 {
        big_gamma(self.gamma)
    }

    /// Model index `i0 + k` of internal vertex `k`.
    pub fn index_of(&self, k: VertexId) -> f64 {
        self.i0 + k as f64
    }

    /// Expected degree `w_i = c i^{-1/(γ-1)}` at real index `i`.
    pub fn weight(&self, i: f64) -> f64 {
        self.c * i.powf(-1.0 / (self.gamma - 1.0))
    }

    /// `δ_i = |w_{i+1} - w_i| / 2`.
    pub fn half_gap(&self, i: f64) -> f64 {
        (self.weight(i + 1.0) - self.weight(i)).abs() / 2.0
    }

    fn raw_probability(&self, i: f64, j: f64) -> f64 {
        let nf = self.n as f64;
        self.k0 * (nf.powf(self.gamma - 3.0) * (i * j)).powf(-1.0 / (self.gamma - 1.0))
    }

    /// Edge probability between real indices `i` and `j`, clamped to 1.
    pub fn edge_probability(&self, i: f64, j: f64) -> Result<f64, ModelError> {
        let (low, high) = (self.i0, self.i0 + self.n as f64);
        for index in [i, j] {
            // tolerate rounding at the ends of the range
            if !(index >= low * (1.0 - 1e-12) && index <= high * (1.0 + 1e-12)) {
                return Err(ModelError::IndexOutOfRange { index, low, high });
            }
        }
        Ok(self.raw_probability(i, j).min(1.0))
    }

    /// Edge probability between internal vertices.
    pub fn vertex_probability(&self, a: VertexId, b: VertexId) -> f64 {
        self.raw_probability(self.index_of(a), self.index_of(b)).min(1.0)
    }

    pub fn warnings(&self) -> Vec<ModelWarning> {
        let mut out = Vec::new();
        let weight_sum: f64 = (0..self.n as VertexId).map(|k| self.weight(self.index_of(k))).sum();
        let max_weight_sq = self.weight(self.i0).powi(2);
        if max_weight_sq >= weight_sum {
            out.push(ModelWarning::WeightCondition { max_weight_sq, weight_sum });
        }
        if self.top_pair >= 1.0 {
            out.push(ModelWarning::ProbabilityClamped { top_pair: self.top_pair });
        }
        out
    }
}

/// Γ = -(2γ² - 8γ + 5) / (2γ - 1).
pub fn big_gamma(gamma: f64) -> f64 {
    -(2.0 * gamma * gamma - 8.0 * gamma + 5.0) / (2.0 * gamma - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelParams {
    ErdosRenyi(ErdosRenyiParams),
    PowerLaw(PowerLawParams),
}

impl ModelParams {
    pub fn n(&self) -> usize {
        match self {
            ModelParams::ErdosRenyi(p) => p.n(),
            ModelParams::PowerLaw(p) => p.n(),
        }
    }

    pub fn sample(&self, seed: u64) -> Graph {
        match self {
            ModelParams::ErdosRenyi(p) => sample_er(p, seed),
            ModelParams::PowerLaw(p) => sample_power_law(p, seed),
        }
    }

    /// Parse `model=er|plg` with `n` and `p`, or `m`, `w`, `gamma`. Power-law
    /// parameters are accepted with clamping; inspect `warnings()`.
    pub fn from_kv(kv: &KvBlock) -> Result<Self, ModelError> {
        let model: String = kv.require("model")?;
        let n: usize = kv.require("n")?;
        match model.as_str() {
            "er" => Ok(ModelParams::ErdosRenyi(ErdosRenyiParams::new(n, kv.require("p")?)?)),
            "plg" => Ok(ModelParams::PowerLaw(PowerLawParams::derive_clamped(
                n,
                kv.require("m")?,
                kv.require("w")?,
                kv.require("gamma")?,
            )?)),
            other => Err(ModelError::UnknownModel(other.to_string())),
        }
    }

    pub fn to_kv(&self) -> KvBlock {
        let mut kv = KvBlock::default();
        match self {
            ModelParams::ErdosRenyi(p) => {
                kv.insert("model", "er");
                kv.insert("n", p.n);
                kv.insert("p", p.p);
            }
            ModelParams::PowerLaw(p) => {
                kv.insert("model", "plg");
                kv.insert("n", p.n);
                kv.insert("m", p.m);
                kv.insert("w", p.w);
                kv.insert("gamma", p.gamma);
            }
        }
        kv
    }
}

/// Assemble a graph from per-row forward neighbor lists (each sorted, all
/// entries greater than the row index).
fn from_forward_rows(rows: Vec<Vec<VertexId>>) -> Graph {
    let n = rows.len();
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for (u, fwd) in rows.into_iter().enumerate() {
        for &v in &fwd {
            adj[v as usize].push(u as VertexId);
        }
        adj[u].extend(fwd);
    }
    Graph::from_raw_adjacency(adj)
}

/// Number of failures before the next success, for success probability `p`
/// in (0, 1).
fn geometric_skip(rng: &mut impl rand::Rng, p: f64) -> u64 {
    let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let s = (u.ln() / (-p).ln_1p()).floor();
    if s.is_finite() && s < u64::MAX as f64 {
        s as u64
    } else {
        u64::MAX
    }
}

/// Sample G(n, p). Each row uses its own stream of `seed`.
pub fn sample_er(params: &ErdosRenyiParams, seed: u64) -> Graph {
    let n = params.n;
    let p = params.p;
    let rows: Vec<Vec<VertexId>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut row = Vec::new();
            if p <= 0.0 {
                return row;
            }
            if p >= 1.0 {
                row.extend(u as VertexId + 1..n as VertexId);
                return row;
            }
            let mut rng = stream_rng(seed, u as u64);
            let mut v = u as u64 + 1;
            loop {
                v = v.saturating_add(geometric_skip(&mut rng, p));
                if v >= n as u64 {
                    break;
                }
                row.push(v as VertexId);
                v += 1;
            }
            row
        })
        .collect();
    from_forward_rows(rows)
}

/// Sample G(w^γ). Probabilities along a row are non-increasing, so each row
/// is generated by geometric skipping at the current probability followed by
/// thinning to the true one.
pub fn sample_power_law(params: &PowerLawParams, seed: u64) -> Graph {
    let n = params.n;
    let rows: Vec<Vec<VertexId>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let mut row = Vec::new();
            let mut rng = stream_rng(seed, u as u64);
            let mut v = u + 1;
            if v >= n {
                return row;
            }
            let mut p = params.vertex_probability(u as VertexId, v as VertexId);
            while v < n && p > 0.0 {
                if p < 1.0 {
                    let skip = geometric_skip(&mut rng, p);
                    v = v.saturating_add(skip.min(n as u64) as usize);
                }
                if v >= n {
                    break;
                }
                let q = params.vertex_probability(u as VertexId, v as VertexId);
                let accept = q >= p || rng.random::<f64>() < q / p;
                if accept {
                    row.push(v as VertexId);
                }
                p = q;
                v += 1;
            }
            row
        })
        .collect();
    from_forward_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn benchmark() -> PowerLawParams {
        PowerLawParams::derive_clamped(10_000, 1000.0, 20.0, 2.75).unwrap()
    }

    #[test]
    fn benchmark_constants() {
        let p = benchmark();
        assert!((p.k0() - 180.0 / 49.0).abs() < 1e-12);
        assert!((p.c() - 1654.8837676).abs() < 1e-6, "c = {}", p.c());
        assert!((p.i0() - 2.4145884459).abs() < 1e-9, "i0 = {}", p.i0());
        // the highest-weight pair is saturated at these settings
        assert!((p.top_pair_probability() - 5.0).abs() < 1e-9);
        assert_eq!(
            PowerLawParams::derive(10_000, 1000.0, 20.0, 2.75),
            Err(ModelError::TopPairProbability(p.top_pair_probability()))
        );
        assert!(p.warnings().contains(&ModelWarning::ProbabilityClamped { top_pair: p.top_pair_probability() }));
    }

    #[test]
    fn probability_at_index_100() {
        let p = benchmark();
        let direct = (180.0 / 49.0) * (10_000f64.powf(-0.25) * 100.0 * 100.0).powf(-1.0 / 1.75);
        assert!((p.edge_probability(100.0, 100.0).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.0709235900406092).abs() < 1e-12);
    }

    #[test]
    fn probability_shape() {
        let p = benchmark();
        let hi = p.i0() + p.n() as f64;
        let floor = p.edge_probability(hi, hi).unwrap();
        for (i, j) in [(3.0, 50.0), (100.0, 7.5), (9000.0, 12.0)] {
            let a = p.edge_probability(i, j).unwrap();
            assert_eq!(a, p.edge_probability(j, i).unwrap());
            assert!(a >= floor);
            assert!(p.edge_probability(i + 1.0, j).unwrap() <= a);
        }
        assert!(matches!(p.edge_probability(1.0, 5.0), Err(ModelError::IndexOutOfRange { .. })));
        assert!(matches!(p.edge_probability(5.0, hi + 1.0), Err(ModelError::IndexOutOfRange { .. })));
    }

    #[test]
    fn gamma_range_is_enforced() {
        assert_eq!(PowerLawParams::derive(100, 50.0, 5.0, 3.2), Err(ModelError::GammaOutOfRange(3.2)));
        assert_eq!(PowerLawParams::derive(100, 50.0, 5.0, 2.5), Err(ModelError::GammaOutOfRange(2.5)));
        assert!(matches!(PowerLawParams::derive(100, 5.0, 5.0, 2.7), Err(ModelError::Degrees { .. })));
        assert!(ErdosRenyiParams::new(5, 1.5).is_err());
    }

    #[test]
    fn big_gamma_values() {
        // -(2 * 7.5625 - 22 + 5) / 4.5 = 1.875 / 4.5
        assert!((big_gamma(2.75) - 0.416_666_666_7).abs() < 1e-9);
        assert!(big_gamma(2.55) > big_gamma(2.75));
        assert!(big_gamma(2.75) > big_gamma(2.95));
    }

    #[test]
    fn er_extremes() {
        let g = sample_er(&ErdosRenyiParams::new(30, 0.0).unwrap(), 1);
        assert_eq!(g.edge_count(), 0);
        let g = sample_er(&ErdosRenyiParams::new(30, 1.0).unwrap(), 1);
        assert_eq!(g, Graph::complete(30));
    }

    #[test]
    fn same_seed_same_graph() {
        let er = ErdosRenyiParams::new(300, 0.05).unwrap();
        assert_eq!(sample_er(&er, 9), sample_er(&er, 9));
        assert_ne!(sample_er(&er, 9), sample_er(&er, 10));
        let pl = PowerLawParams::derive_clamped(2000, 100.0, 10.0, 2.7).unwrap();
        assert_eq!(sample_power_law(&pl, 3), sample_power_law(&pl, 3));
        assert_ne!(sample_power_law(&pl, 3), sample_power_law(&pl, 4));
    }

    #[test]
    fn kv_roundtrip() {
        let m = ModelParams::PowerLaw(benchmark());
        let back = ModelParams::from_kv(&KvBlock::parse(&m.to_kv().render()).unwrap()).unwrap();
        assert_eq!(back, m);
        let kv = KvBlock::parse("model=ba\nn=3\n").unwrap();
        assert_eq!(ModelParams::from_kv(&kv), Err(ModelError::UnknownModel("ba".into())));
    }
}
