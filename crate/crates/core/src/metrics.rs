//! dK-2 series (joint degree distribution) and the deviation between two
//! series.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::graph::{Graph, GraphError};

/// Edge counts keyed by `(min degree, max degree)` of the endpoints.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dk2Series {
    counts: BTreeMap<(usize, usize), u64>,
}

/// Denominator used by [`dk2_deviation_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Dk2Normalization {
    /// Distinct keys in the union of both series.
    #[default]
    Union,
    /// Distinct keys in the first (reference) series.
    Reference,
}

impl Dk2Series {
    pub fn get(&self, k1: usize, k2: usize) -> u64 {
        let key = (k1.min(k2), k1.max(k2));
        self.counts.get(&key).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    /// Build from explicit entries; zero counts are dropped, repeated keys add.
    pub fn from_counts(entries: impl IntoIterator<Item = ((usize, usize), u64)>) -> Self {
        let mut counts = BTreeMap::new();
        for ((a, b), c) in entries {
            if c > 0 {
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += c;
            }
        }
        Dk2Series { counts }
    }

    /// `k1 k2 count` lines in key order.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for ((a, b), c) in &self.counts {
            writeln!(out, "{a} {b} {c}")?;
        }
        out.flush()
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, GraphError> {
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let parse_err = || GraphError::Parse { line: idx + 1, message: "expected `k1 k2 count`".into() };
            let nums: Vec<u64> = t.split_whitespace().map(|x| x.parse().map_err(|_| parse_err())).collect::<Result<_, _>>()?;
            if nums.len() != 3 {
                return Err(parse_err());
            }
            entries.push(((nums[0] as usize, nums[1] as usize), nums[2]));
        }
        Ok(Self::from_counts(entries))
    }
}

pub fn dk2_series(g: &Graph) -> Dk2Series {
    let mut counts = BTreeMap::new();
    for p in g.edges() {
        let (a, b) = (g.degree(p.u()), g.degree(p.v()));
        *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
    }
    let series = Dk2Series { counts };
    assert_eq!(series.total(), g.edge_count() as u64);
    series
}

/// Unnormalized Euclidean distance over the union of keys.
pub fn dk2_euclidean(a: &Dk2Series, b: &Dk2Series) -> f64 {
    union_keys(a, b)
        .map(|(k1, k2)| {
            let d = a.get(k1, k2) as f64 - b.get(k1, k2) as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn union_keys<'a>(a: &'a Dk2Series, b: &'a Dk2Series) -> impl Iterator<Item = (usize, usize)> + 'a {
    a.counts.keys().chain(b.counts.keys().filter(|k| !a.counts.contains_key(k))).copied()
}

/// Euclidean distance divided by the number of distinct keys in the union.
pub fn dk2_deviation(a: &Dk2Series, b: &Dk2Series) -> f64 {
    dk2_deviation_with(a, b, Dk2Normalization::Union)
}

pub fn dk2_deviation_with(a: &Dk2Series, b: &Dk2Series, norm: Dk2Normalization) -> f64 {
    let keys = match norm {
        Dk2Normalization::Union => union_keys(a, b).count(),
        Dk2Normalization::Reference => a.len(),
    };
    if keys == 0 {
        return 0.0;
    }
    dk2_euclidean(a, b) / keys as f64
}
