//! Property checks shared by the `properties` suite and the acceptance run.

#![allow(dead_code)]

use graphmark::adversary::{budget_capped_attack, random_flip_attack, strategy_by_name, uniform_pair_attack, AttackBudget};
use graphmark::fit::sample_discrete_power_law;
use graphmark::graph::{identity_distances, pair_count, Graph, VertexPair};
use graphmark::metrics::{dk2_deviation, dk2_euclidean, dk2_series};
use graphmark::models::{sample_er, sample_power_law, ErdosRenyiParams, PowerLawParams};
use graphmark::separation::{label, LabelMode, Thresholds};
use graphmark::watermark::{keygen, mark, ResampleSource, WatermarkId};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const CASES: u32 = 10_000;

/// Graph on 2..=max_n vertices from one coin per pair.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |coins| {
            let edges = coins
                .iter()
                .enumerate()
                .filter(|(_, &c)| c)
                .map(|(k, _)| {
                    let p = VertexPair::from_linear_index(n, k as u64);
                    (p.u(), p.v())
                });
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

fn adjacency_matrix(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut m = vec![vec![false; n]; n];
    for p in g.edges() {
        m[p.u() as usize][p.v() as usize] = true;
        m[p.v() as usize][p.u() as usize] = true;
    }
    m
}

/// Flipping a multiset of pairs twice is the identity, and one application
/// matches an adjacency-matrix XOR.
pub fn flip_involution((g, raw): (Graph, Vec<u64>)) -> Result<(), TestCaseError> {
    let n = g.n();
    let pairs: Vec<VertexPair> = raw.iter().map(|&k| VertexPair::from_linear_index(n, k % pair_count(n))).collect();
    let once = g.with_flips(pairs.iter().copied());
    prop_assert_eq!(&once.with_flips(pairs.iter().copied()), &g);
    let mut m = adjacency_matrix(&g);
    for p in &pairs {
        let (u, v) = (p.u() as usize, p.v() as usize);
        m[u][v] = !m[u][v];
        m[v][u] = !m[v][u];
    }
    prop_assert_eq!(adjacency_matrix(&once), m);
    if let Some(&p) = pairs.first() {
        prop_assert_eq!(g.flip_edge(p).unwrap().flip_edge(p).unwrap(), g);
    }
    Ok(())
}

pub fn arb_flip_case() -> impl Strategy<Value = (Graph, Vec<u64>)> {
    (arb_graph(16), proptest::collection::vec(any::<u64>(), 0..40))
}

/// Marking only touches key pairs, and every key pair ends up equal to its bit.
pub fn mark_containment((g, ell_share, prob, seed): (Graph, f64, f64, u64)) -> Result<(), TestCaseError> {
    let n = g.n();
    let (high, medium) = (2, n / 2 - 2);
    let labels = label(&g, &Thresholds::with_counts(high, medium).unwrap(), LabelMode::Relaxed).unwrap();
    let x = labels.len();
    let ell = ((x / 2) as f64 * ell_share) as usize;
    let key = keygen(ell, n, x, 1, seed).unwrap();
    let copy = mark(&key, &g, &labels, &ResampleSource::Constant(prob), seed).unwrap();
    let order = labels.ordered_vertices();
    let key_pairs: Vec<VertexPair> =
        key.pairs().iter().map(|&(a, b)| VertexPair::new(order[a - 1], order[b - 1]).unwrap()).collect();
    let diff = g.edge_difference(&copy.graph).unwrap();
    prop_assert_eq!(diff.len(), copy.changed);
    for p in &diff {
        prop_assert!(key_pairs.contains(p), "{} changed outside the key", p);
    }
    for (j, p) in key_pairs.iter().enumerate() {
        prop_assert_eq!(copy.graph.contains(*p), copy.id.0.get(j));
    }
    // t = 1: no vertex gains or loses more than one edge
    prop_assert!(identity_distances(&g, &copy.graph).unwrap().vertex <= 1);
    Ok(())
}

pub fn arb_mark_case() -> impl Strategy<Value = (Graph, f64, f64, u64)> {
    (arb_graph(20).prop_filter("needs 8 vertices", |g| g.n() >= 8), 0.0..=1.0f64, 0.0..=1.0f64, any::<u64>())
}

/// Capped attacks never exceed either cap and report what they applied.
pub fn budget_caps(
    (g, strategy, amount, max_total, per_vertex, seed): (Graph, usize, f64, usize, usize, u64),
) -> Result<(), TestCaseError> {
    let (name, amount) = match strategy {
        0 => ("uniform", amount * 60.0),
        1 => ("random", amount),
        _ => ("high-degree", amount * 60.0),
    };
    let s = strategy_by_name(name, amount).unwrap();
    let budget = AttackBudget::new(max_total, per_vertex);
    let out = budget_capped_attack(&g, &budget, s.as_ref(), seed);
    let diff = g.edge_difference(&out.graph).unwrap();
    prop_assert_eq!(diff.len(), out.applied);
    prop_assert!(out.applied <= max_total);
    let mut touched = vec![0usize; g.n()];
    for p in &diff {
        touched[p.u() as usize] += 1;
        touched[p.v() as usize] += 1;
    }
    prop_assert!(touched.iter().all(|&c| c <= per_vertex));
    let d = identity_distances(&g, &out.graph).unwrap();
    prop_assert_eq!(d.edit, out.applied);
    prop_assert!(d.vertex <= per_vertex);
    Ok(())
}

pub fn arb_budget_case() -> impl Strategy<Value = (Graph, usize, f64, usize, usize, u64)> {
    (arb_graph(16), 0..3usize, 0.0..=1.0f64, 0..30usize, 0..5usize, any::<u64>())
}

/// dK-2 series totals, and the pseudometric axioms.
pub fn dk2_pseudometric((a, b, c): (Graph, Graph, Graph)) -> Result<(), TestCaseError> {
    let (sa, sb, sc) = (dk2_series(&a), dk2_series(&b), dk2_series(&c));
    for (s, g) in [(&sa, &a), (&sb, &b), (&sc, &c)] {
        prop_assert_eq!(s.total(), g.edge_count() as u64);
    }
    prop_assert_eq!(dk2_deviation(&sa, &sa), 0.0);
    prop_assert_eq!(dk2_euclidean(&sa, &sa), 0.0);
    prop_assert_eq!(dk2_deviation(&sa, &sb), dk2_deviation(&sb, &sa));
    prop_assert!(dk2_deviation(&sa, &sb) >= 0.0);
    prop_assert!(dk2_deviation(&sa, &sb) <= dk2_euclidean(&sa, &sb));
    let (ab, bc, ac) = (dk2_euclidean(&sa, &sb), dk2_euclidean(&sb, &sc), dk2_euclidean(&sa, &sc));
    prop_assert!(ac <= ab + bc + 1e-9, "{} > {} + {}", ac, ab, bc);
    Ok(())
}

pub fn arb_dk2_case() -> impl Strategy<Value = (Graph, Graph, Graph)> {
    (arb_graph(12), arb_graph(12), arb_graph(12))
}

/// Every stochastic routine returns the same thing for the same seed.
pub fn determinism(seed: u64) -> Result<(), TestCaseError> {
    let er = ErdosRenyiParams::new(24, 0.2).unwrap();
    let g = sample_er(&er, seed);
    prop_assert_eq!(&g, &sample_er(&er, seed));
    let pl = PowerLawParams::derive_clamped(40, 12.0, 4.0, 2.75).unwrap();
    prop_assert_eq!(sample_power_law(&pl, seed), sample_power_law(&pl, seed));
    prop_assert_eq!(keygen(6, 24, 12, 1, seed), keygen(6, 24, 12, 1, seed));
    prop_assert_eq!(WatermarkId::random(32, seed), WatermarkId::random(32, seed));
    let labels = label(&g, &Thresholds::with_counts(2, 10).unwrap(), LabelMode::Relaxed).unwrap();
    let key = keygen(6, 24, 12, 1, seed).unwrap();
    let src = ResampleSource::default();
    prop_assert_eq!(mark(&key, &g, &labels, &src, seed), mark(&key, &g, &labels, &src, seed));
    prop_assert_eq!(random_flip_attack(&g, 0.1, seed), random_flip_attack(&g, 0.1, seed));
    prop_assert_eq!(uniform_pair_attack(&g, 20, seed), uniform_pair_attack(&g, 20, seed));
    let s = strategy_by_name("high-degree", 10.0).unwrap();
    let budget = AttackBudget::new(8, 2);
    prop_assert_eq!(budget_capped_attack(&g, &budget, s.as_ref(), seed), budget_capped_attack(&g, &budget, s.as_ref(), seed));
    prop_assert_eq!(sample_discrete_power_law(30, 2.5, 2, seed), sample_discrete_power_law(30, 2.5, 2, seed));
    Ok(())
}
