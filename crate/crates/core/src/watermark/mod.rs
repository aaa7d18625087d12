//! Edge-flipping watermarks: key generation, marking and identification.
//!
//! A key is a list of pairs of ranks into the canonical vertex order `V` of
//! the original graph (high vertices by rank, then medium vertices by bit
//! vector). Marking forces each key pair's edge to the matching id bit;
//! identification recovers `V` in a suspect graph and reads the bits back.

mod mark;
mod recover;

pub use mark::{mark, mark_with_id, MarkedCopy, ResampleSource};
pub use recover::{
    approximate_isomorphism, extract_bits, identify, Identification, IdentifyOptions, Matching, RecoveryFailure,
    Reference,
};

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng as _;
use thiserror::Error;

use crate::bits::{BitString, BitStringError};
use crate::rng::{derive_seed, rng_from_seed};
use crate::separation::LabelFailure;

#[derive(Debug, Error, PartialEq)]
pub enum WatermarkError {
    #[error("cannot place {ell} pairs on {x} ranks with at most {t} per rank")]
    KeyInfeasible { ell: usize, x: usize, t: usize },
    #[error("key generation gave up after {restarts} restarts")]
    KeyBudgetExhausted { restarts: usize },
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("key rank {rank} exceeds the {labeled} labeled vertices")]
    RankOutOfRange { rank: usize, labeled: usize },
    #[error("id has {got} bits, key has {expected} pairs")]
    IdLength { expected: usize, got: usize },
    #[error("no candidate ids given")]
    NoIds,
    #[error("resampling probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error(transparent)]
    Label(#[from] LabelFailure),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Keygen restarts before giving up.
pub const KEYGEN_RESTARTS: usize = 10;
/// Rejected draws allowed per key pair within one attempt.
pub const KEYGEN_REJECTIONS_PER_PAIR: usize = 100;

/// Secret key: `ell` distinct rank pairs, 1-based, `u < v`, each rank used
/// at most `t` times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkKey {
    n: usize,
    t: usize,
    pairs: Vec<(usize, usize)>,
}

impl MarkKey {
    pub fn new(n: usize, t: usize, pairs: Vec<(usize, usize)>) -> Result<Self, WatermarkError> {
        let mut seen = HashSet::new();
        let mut uses: std::collections::HashMap<usize, usize> = Default::default();
        for &(u, v) in &pairs {
            if u == 0 || u >= v {
                return Err(WatermarkError::InvalidKey(format!("pair ({u}, {v}) must satisfy 1 <= u < v")));
            }
            if !seen.insert((u, v)) {
                return Err(WatermarkError::InvalidKey(format!("pair ({u}, {v}) repeated")));
            }
            for r in [u, v] {
                let c = uses.entry(r).or_default();
                *c += 1;
                if *c > t {
                    return Err(WatermarkError::InvalidKey(format!("rank {r} used more than t = {t} times")));
                }
            }
        }
        Ok(MarkKey { n, t, pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Largest rank used, i.e. the number of labeled vertices the key needs.
    pub fn max_rank(&self) -> usize {
        self.pairs.iter().map(|&(_, v)| v).max().unwrap_or(0)
    }

    /// `ell n t` on the first line, then one `u v` line per pair.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), WatermarkError> {
        let io = |e: std::io::Error| WatermarkError::Io(e.to_string());
        writeln!(out, "{} {} {}", self.len(), self.n, self.t).map_err(io)?;
        for (u, v) in &self.pairs {
            writeln!(out, "{u} {v}").map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, WatermarkError> {
        let mut lines = reader.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let numbers = |line: usize, text: &str, want: usize| -> Result<Vec<usize>, WatermarkError> {
            let out: Vec<usize> = text
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| WatermarkError::Parse { line, message: format!("bad number {t:?}") }))
                .collect::<Result<_, _>>()?;
            if out.len() != want {
                return Err(WatermarkError::Parse { line, message: format!("expected {want} numbers") });
            }
            Ok(out)
        };
        let (idx, header) = lines.next().ok_or(WatermarkError::Parse { line: 1, message: "empty key file".into() })?;
        let header = header.map_err(|e| WatermarkError::Io(e.to_string()))?;
        let h = numbers(idx + 1, &header, 3)?;
        let (ell, n, t) = (h[0], h[1], h[2]);
        let mut pairs = Vec::with_capacity(ell);
        for (idx, line) in lines {
            let line = line.map_err(|e| WatermarkError::Io(e.to_string()))?;
            let p = numbers(idx + 1, &line, 2)?;
            pairs.push((p[0], p[1]));
        }
        if pairs.len() != ell {
            return Err(WatermarkError::Parse { line: 1, message: format!("header says {ell} pairs, found {}", pairs.len()) });
        }
        MarkKey::new(n, t, pairs)
    }
}

/// Sample `ell` distinct pairs over ranks `1..=x` with no rank in more than
/// `t` pairs.
///
/// Each step draws two distinct ranks that still have capacity and rejects
/// pairs already in the key, so every admissible pair is equally likely at
/// each step. An attempt that gets stuck or exceeds `100·ell` rejections is
/// restarted with a fresh derived seed, up to ten times.
pub fn keygen(ell: usize, n: usize, x: usize, t: usize, seed: u64) -> Result<MarkKey, WatermarkError> {
    let infeasible = WatermarkError::KeyInfeasible { ell, x, t };
    if ell == 0 {
        return Ok(MarkKey { n, t, pairs: Vec::new() });
    }
    if x < 2 || ell > x * t / 2 || ell as u64 > crate::graph::pair_count(x) {
        return Err(infeasible);
    }
    for restart in 0..KEYGEN_RESTARTS {
        let mut rng = rng_from_seed(derive_seed(seed, &[restart as u64]));
        if let Some(pairs) = keygen_attempt(ell, x, t, &mut rng) {
            return Ok(MarkKey { n, t, pairs });
        }
    }
    Err(WatermarkError::KeyBudgetExhausted { restarts: KEYGEN_RESTARTS })
}

fn keygen_attempt(ell: usize, x: usize, t: usize, rng: &mut crate::rng::Rng) -> Option<Vec<(usize, usize)>> {
    let mut capacity = vec![t; x];
    // ranks with spare capacity, plus each rank's slot in that list
    let mut open: Vec<usize> = (0..x).collect();
    let mut slot: Vec<usize> = (0..x).collect();
    let mut chosen = HashSet::with_capacity(ell);
    let mut pairs = Vec::with_capacity(ell);
    let mut rejections = 0;
    while pairs.len() < ell {
        let k = open.len();
        if k < 2 {
            return None;
        }
        let i = rng.random_range(0..k);
        let mut j = rng.random_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        let (a, b) = (open[i].min(open[j]), open[i].max(open[j]));
        if !chosen.insert((a, b)) {
            rejections += 1;
            if rejections > KEYGEN_REJECTIONS_PER_PAIR * ell {
                return None;
            }
            continue;
        }
        pairs.push((a + 1, b + 1));
        for r in [a, b] {
            capacity[r] -= 1;
            if capacity[r] == 0 {
                let s = slot[r];
                open.swap_remove(s);
                if s < open.len() {
                    slot[open[s]] = s;
                }
            }
        }
    }
    Some(pairs)
}

/// Watermark id: one bit per key pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WatermarkId(pub BitString);

impl WatermarkId {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Uniformly random id of `len` bits.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let bits: Vec<bool> = (0..len).map(|_| rng.random_bool(0.5)).collect();
        WatermarkId(BitString::from_bools(&bits))
    }
}

impl fmt::Display for WatermarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for WatermarkId {
    type Err = BitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim().parse().map(WatermarkId)
    }
}

/// Number of positions where `a` and `b` differ.
pub fn hamming(a: &BitString, b: &BitString) -> Result<usize, BitStringError> {
    a.hamming(b)
}
