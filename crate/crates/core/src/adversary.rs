//! Edge-flipping adversaries and budget accounting.

use std::collections::HashSet;
use std::fmt;

use rand::seq::index;
use rand::Rng as _;
use thiserror::Error;

use crate::graph::{pair_count, Graph, VertexId, VertexPair};
use crate::kv::{KvBlock, KvError};
use crate::models::{sample_er, ErdosRenyiParams};
use crate::rng::{derive_seed, rng_from_seed, Rng};

#[derive(Debug, Error, PartialEq)]
pub enum AttackError {
    #[error("flip probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("cannot flip {requested} distinct pairs in a graph with {available} pairs")]
    TooManyPairs { requested: u64, available: u64 },
    #[error("fraction {0} is outside [0, 1]")]
    Fraction(f64),
    #[error("unknown strategy {0:?}; expected uniform, random or high-degree")]
    UnknownStrategy(String),
    #[error("unknown attack {0:?}; expected random, uniform or capped")]
    UnknownAttack(String),
    #[error(transparent)]
    Config(#[from] KvError),
}

/// Flip limits. `usize::MAX` means unlimited.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackBudget {
    /// Edit-distance budget.
    pub max_total_flips: usize,
    /// Vertex-distance budget.
    pub max_flips_per_vertex: usize,
    /// Optional size of the attack as a fraction of all `C(n, 2)` pairs.
    pub fraction_of_potential_edges: Option<f64>,
}

impl AttackBudget {
    pub fn new(max_total_flips: usize, max_flips_per_vertex: usize) -> Self {
        AttackBudget { max_total_flips, max_flips_per_vertex, fraction_of_potential_edges: None }
    }

    pub fn unlimited() -> Self {
        Self::new(usize::MAX, usize::MAX)
    }

    pub fn with_fraction(mut self, fraction: f64) -> Result<Self, AttackError> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(AttackError::Fraction(fraction));
        }
        self.fraction_of_potential_edges = Some(fraction);
        Ok(self)
    }
}

/// Number of pairs a fraction of the `C(n, 2)` potential edges amounts to.
pub fn pairs_for_fraction(n: usize, fraction: f64) -> Result<u64, AttackError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(AttackError::Fraction(fraction));
    }
    Ok((fraction * pair_count(n) as f64).round() as u64)
}

/// Toggle every vertex pair independently with probability `prob`.
pub fn random_flip_attack(g: &Graph, prob: f64, seed: u64) -> Result<Graph, AttackError> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(AttackError::Probability(prob));
    }
    // the toggled set is a G(n, prob) sample; above 1/2 toggle the complement's
    // pairs with the opposite probability instead
    let (base, q) = if prob > 0.5 { (g.complement(), 1.0 - prob) } else { (g.clone(), prob) };
    if q == 0.0 {
        return Ok(base);
    }
    let mask = sample_er(&ErdosRenyiParams::new(g.n(), q).expect("probability checked"), seed);
    Ok(base.with_flips(mask.edges()))
}

/// Toggle exactly `num_pairs` distinct vertex pairs chosen uniformly.
pub fn uniform_pair_attack(g: &Graph, num_pairs: u64, seed: u64) -> Result<Graph, AttackError> {
    let available = pair_count(g.n());
    if num_pairs > available {
        return Err(AttackError::TooManyPairs { requested: num_pairs, available });
    }
    if num_pairs == available {
        return Ok(g.complement());
    }
    let mut rng = rng_from_seed(seed);
    Ok(g.with_flips(uniform_pairs(g.n(), num_pairs, &mut rng)))
}

fn uniform_pairs(n: usize, k: u64, rng: &mut Rng) -> Vec<VertexPair> {
    index::sample(rng, pair_count(n) as usize, k as usize)
        .into_iter()
        .map(|i| VertexPair::from_linear_index(n, i as u64))
        .collect()
}

/// Proposes flips; budgets are enforced by [`budget_capped_attack`].
pub trait FlipStrategy: Send + Sync {
    fn name(&self) -> &str;
    fn propose(&self, g: &Graph, budget: &AttackBudget, rng: &mut Rng) -> Vec<VertexPair>;
}

/// `count` uniform distinct pairs (or the budget's fraction of all pairs).
#[derive(Clone, Debug)]
pub struct UniformStrategy {
    pub count: u64,
}

impl FlipStrategy for UniformStrategy {
    fn name(&self) -> &str {
        "uniform"
    }

    fn propose(&self, g: &Graph, budget: &AttackBudget, rng: &mut Rng) -> Vec<VertexPair> {
        let count = match budget.fraction_of_potential_edges {
            Some(f) => pairs_for_fraction(g.n(), f).unwrap_or(0),
            None => self.count,
        };
        uniform_pairs(g.n(), count.min(pair_count(g.n())), rng)
    }
}

/// Each pair independently with probability `prob`.
#[derive(Clone, Debug)]
pub struct RandomStrategy {
    pub prob: f64,
}

impl FlipStrategy for RandomStrategy {
    fn name(&self) -> &str {
        "random"
    }

    fn propose(&self, g: &Graph, _budget: &AttackBudget, rng: &mut Rng) -> Vec<VertexPair> {
        let mask = sample_er(&ErdosRenyiParams::new(g.n(), self.prob.clamp(0.0, 1.0)).expect("clamped"), rng.random());
        mask.edges().collect()
    }
}

/// Goes after the highest-degree vertices first, giving each its full
/// per-vertex allowance of flips to random partners until `count` flips
/// have been proposed.
#[derive(Clone, Debug)]
pub struct HighDegreeFirst {
    pub count: u64,
}

impl FlipStrategy for HighDegreeFirst {
    fn name(&self) -> &str {
        "high-degree"
    }

    fn propose(&self, g: &Graph, budget: &AttackBudget, rng: &mut Rng) -> Vec<VertexPair> {
        let n = g.n();
        if n < 2 {
            return Vec::new();
        }
        let mut order: Vec<VertexId> = (0..n as VertexId).collect();
        order.sort_unstable_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b)));
        let per_vertex = budget.max_flips_per_vertex.clamp(1, n - 1);
        let mut out = Vec::new();
        'outer: for &v in &order {
            for _ in 0..per_vertex {
                if out.len() as u64 >= self.count {
                    break 'outer;
                }
                let mut w = rng.random_range(0..n as VertexId - 1);
                if w >= v {
                    w += 1;
                }
                out.push(VertexPair::new(v, w).expect("distinct"));
            }
        }
        out
    }
}

/// Build a named strategy. `amount` is a pair count for `uniform` and
/// `high-degree`, and a probability for `random`.
pub fn strategy_by_name(name: &str, amount: f64) -> Result<Box<dyn FlipStrategy>, AttackError> {
    match name {
        "uniform" => Ok(Box::new(UniformStrategy { count: amount.max(0.0) as u64 })),
        "random" => {
            if !(0.0..=1.0).contains(&amount) {
                return Err(AttackError::Probability(amount));
            }
            Ok(Box::new(RandomStrategy { prob: amount }))
        }
        "high-degree" => Ok(Box::new(HighDegreeFirst { count: amount.max(0.0) as u64 })),
        other => Err(AttackError::UnknownStrategy(other.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackOutcome {
    pub graph: Graph,
    pub applied: usize,
    /// Proposals dropped for exceeding a cap or repeating an applied pair.
    pub skipped: usize,
}

/// Apply the strategy's proposals in order, skipping any flip that would
/// exceed a cap or that repeats a pair already flipped.
pub fn budget_capped_attack(
    g: &Graph,
    budget: &AttackBudget,
    strategy: &dyn FlipStrategy,
    seed: u64,
) -> AttackOutcome {
    let mut rng = rng_from_seed(seed);
    let proposals = strategy.propose(g, budget, &mut rng);
    let mut per_vertex = vec![0usize; g.n()];
    let mut applied: Vec<VertexPair> = Vec::new();
    let mut seen = HashSet::new();
    let mut skipped = 0;
    for p in proposals {
        if applied.len() >= budget.max_total_flips {
            skipped += 1;
            continue;
        }
        let (u, v) = (p.u() as usize, p.v() as usize);
        if per_vertex[u] >= budget.max_flips_per_vertex
            || per_vertex[v] >= budget.max_flips_per_vertex
            || !seen.insert(p)
        {
            skipped += 1;
            continue;
        }
        per_vertex[u] += 1;
        per_vertex[v] += 1;
        applied.push(p);
    }
    AttackOutcome { graph: g.with_flips(applied.iter().copied()), applied: applied.len(), skipped }
}

/// Attack described by a `key=value` block.
#[derive(Clone, Debug, PartialEq)]
pub enum AttackSpec {
    Random { prob: f64 },
    Uniform { pairs: PairCount },
    Capped { strategy: String, amount: f64, budget: AttackBudget },
}

/// Attack size given directly or as a fraction of potential edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairCount {
    Exact(u64),
    Fraction(f64),
}

impl PairCount {
    pub fn resolve(self, n: usize) -> Result<u64, AttackError> {
        match self {
            PairCount::Exact(k) => Ok(k),
            PairCount::Fraction(f) => pairs_for_fraction(n, f),
        }
    }
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_kv().render().trim_end())
    }
}

impl AttackSpec {
    pub const KEYS: [&'static str; 9] =
        ["attack", "prob", "pairs", "fraction", "strategy", "amount", "max_total", "max_per_vertex", "seed"];

    /// Keys: `attack=random` with `prob`; `attack=uniform` with `pairs` or
    /// `fraction`; `attack=capped` with `strategy`, `amount`, and optional
    /// `max_total`, `max_per_vertex`, `fraction`.
    pub fn from_kv(kv: &KvBlock) -> Result<Self, AttackError> {
        kv.reject_unknown(&Self::KEYS)?;
        let attack: String = kv.require("attack")?;
        match attack.as_str() {
            "random" => {
                let prob: f64 = kv.require("prob")?;
                if !(0.0..=1.0).contains(&prob) {
                    return Err(AttackError::Probability(prob));
                }
                Ok(AttackSpec::Random { prob })
            }
            "uniform" => {
                let pairs = match (kv.get::<u64>("pairs")?, kv.get::<f64>("fraction")?) {
                    (Some(k), _) => PairCount::Exact(k),
                    (None, Some(f)) => {
                        if !(0.0..=1.0).contains(&f) {
                            return Err(AttackError::Fraction(f));
                        }
                        PairCount::Fraction(f)
                    }
                    (None, None) => return Err(KvError::Missing("pairs".into()).into()),
                };
                Ok(AttackSpec::Uniform { pairs })
            }
            "capped" => {
                let strategy: String = kv.require("strategy")?;
                let amount: f64 = kv.get("amount")?.unwrap_or(0.0);
                strategy_by_name(&strategy, amount)?;
                let mut budget = AttackBudget::new(
                    kv.get("max_total")?.unwrap_or(usize::MAX),
                    kv.get("max_per_vertex")?.unwrap_or(usize::MAX),
                );
                if let Some(f) = kv.get::<f64>("fraction")? {
                    budget = budget.with_fraction(f)?;
                }
                Ok(AttackSpec::Capped { strategy, amount, budget })
            }
            other => Err(AttackError::UnknownAttack(other.to_string())),
        }
    }

    pub fn to_kv(&self) -> KvBlock {
        let mut kv = KvBlock::default();
        match self {
            AttackSpec::Random { prob } => {
                kv.insert("attack", "random");
                kv.insert("prob", prob);
            }
            AttackSpec::Uniform { pairs } => {
                kv.insert("attack", "uniform");
                match pairs {
                    PairCount::Exact(k) => kv.insert("pairs", k),
                    PairCount::Fraction(f) => kv.insert("fraction", f),
                }
            }
            AttackSpec::Capped { strategy, amount, budget } => {
                kv.insert("attack", "capped");
                kv.insert("strategy", strategy);
                kv.insert("amount", amount);
                if budget.max_total_flips != usize::MAX {
                    kv.insert("max_total", budget.max_total_flips);
                }
                if budget.max_flips_per_vertex != usize::MAX {
                    kv.insert("max_per_vertex", budget.max_flips_per_vertex);
                }
                if let Some(f) = budget.fraction_of_potential_edges {
                    kv.insert("fraction", f);
                }
            }
        }
        kv
    }

    /// Run the attack on `g`.
    pub fn apply(&self, g: &Graph, seed: u64) -> Result<Graph, AttackError> {
        match self {
            AttackSpec::Random { prob } => random_flip_attack(g, *prob, seed),
            AttackSpec::Uniform { pairs } => uniform_pair_attack(g, pairs.resolve(g.n())?, seed),
            AttackSpec::Capped { strategy, amount, budget } => {
                let s = strategy_by_name(strategy, *amount)?;
                Ok(budget_capped_attack(g, budget, s.as_ref(), derive_seed(seed, &[0])).graph)
            }
        }
    }
}
