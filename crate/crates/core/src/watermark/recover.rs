//! Recovering the labeled vertices of the original graph inside a suspect
//! graph, and reading the id back.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use rayon::prelude::*;

use crate::bits::BitString;
use crate::graph::{Graph, VertexId};
use crate::separation::label::{label_counts, neighbor_degrees};
use crate::separation::{LabelFailure, LabelMode, LabelSet, Thresholds};

use super::{MarkKey, WatermarkError, WatermarkId};

/// Candidates kept per medium vertex before falling back to a full scan.
const SHORTLIST: usize = 64;

/// What the identifier keeps about the original graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    n: usize,
    labels: LabelSet,
    high_profiles: Vec<Vec<u32>>,
}

impl Reference {
    pub fn new(g: &Graph, thresholds: &Thresholds, mode: LabelMode) -> Result<Self, LabelFailure> {
        Ok(Self::from_labels(g, crate::separation::label(g, thresholds, mode)?))
    }

    pub fn from_labels(g: &Graph, labels: LabelSet) -> Self {
        let high_profiles = labels.high.iter().map(|h| neighbor_degrees(g, h.vertex)).collect();
        Reference { n: g.n(), labels, high_profiles }
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn mode(&self) -> LabelMode {
        self.labels.mode
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RecoveryFailure {
    Label(LabelFailure),
    /// Vertices were added or removed.
    SizeMismatch { expected: usize, got: usize },
    /// A suspect vertex was the nearest match of two original vertices.
    DuplicateMatch { vertex: VertexId },
    /// The closest id is further than the configured cutoff.
    TooFar { distance: usize, limit: usize },
}

impl fmt::Display for RecoveryFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecoveryFailure::Label(e) => write!(f, "labeling failed: {e}"),
            RecoveryFailure::SizeMismatch { expected, got } => {
                write!(f, "suspect has {got} vertices, original has {expected}")
            }
            RecoveryFailure::DuplicateMatch { vertex } => write!(f, "suspect vertex {vertex} matched more than once"),
            RecoveryFailure::TooFar { distance, limit } => {
                write!(f, "closest id is at distance {distance}, beyond the cutoff {limit}")
            }
        }
    }
}

/// Images in the suspect graph of the original's labeled vertices, in
/// canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub images: Vec<Option<VertexId>>,
}

fn profile_distance(a: &[u32], b: &[u32]) -> u64 {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| {
            let (x, y) = (a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0));
            x.abs_diff(y) as u64
        })
        .sum()
}

/// Adjacency bits of each candidate to `anchors`, bit `r` for `anchors[r]`.
fn bits_against(h: &Graph, anchors: &[Option<VertexId>], candidates: &[VertexId]) -> Vec<BitString> {
    let mut slot = std::collections::HashMap::with_capacity(candidates.len());
    for (j, &w) in candidates.iter().enumerate() {
        slot.insert(w, j);
    }
    let mut out = vec![BitString::zeros(anchors.len()); candidates.len()];
    for (r, a) in anchors.iter().enumerate() {
        let Some(a) = *a else { continue };
        for w in h.neighbors(a) {
            if let Some(&j) = slot.get(w) {
                out[j].set(r, true);
            }
        }
    }
    out
}

/// Match the original's labeled vertices to vertices of `h`.
///
/// Strict mode labels `h` strictly, pairs high vertices by rank and sends
/// each medium vertex to the nearest label in Hamming distance (ties to the
/// earliest label). It fails if labeling fails or a suspect vertex is used
/// twice. Relaxed mode pairs high vertices greedily by the L1 distance of
/// their sorted neighbor-degree lists, recomputes the suspect's medium bit
/// vectors against the matched high vertices, and pairs medium vertices
/// greedily by ascending Hamming distance, ties by canonical order.
pub fn approximate_isomorphism(reference: &Reference, h: &Graph) -> Result<Matching, RecoveryFailure> {
    if h.n() != reference.n {
        return Err(RecoveryFailure::SizeMismatch { expected: reference.n, got: h.n() });
    }
    let labels = &reference.labels;
    let (hc, mc) = (labels.high.len(), labels.medium.len());
    let suspect = label_counts(h, hc, mc, labels.mode).map_err(RecoveryFailure::Label)?;
    match labels.mode {
        LabelMode::Strict => strict_match(labels, &suspect),
        LabelMode::Relaxed => Ok(relaxed_match(reference, h, &suspect)),
    }
}

fn strict_match(labels: &LabelSet, suspect: &LabelSet) -> Result<Matching, RecoveryFailure> {
    let mut images: Vec<Option<VertexId>> = suspect.high.iter().map(|x| Some(x.vertex)).collect();
    let nearest: Vec<usize> = labels
        .medium
        .par_iter()
        .map(|m| {
            suspect
                .medium
                .iter()
                .enumerate()
                .min_by_key(|(j, s)| (m.bits.hamming_unchecked(&s.bits), *j))
                .map(|(j, _)| j)
                .expect("suspect has as many medium vertices as the original")
        })
        .collect();
    let mut used = vec![false; suspect.medium.len()];
    for j in nearest {
        if std::mem::replace(&mut used[j], true) {
            return Err(RecoveryFailure::DuplicateMatch { vertex: suspect.medium[j].vertex });
        }
        images.push(Some(suspect.medium[j].vertex));
    }
    Ok(Matching { images })
}

fn relaxed_match(reference: &Reference, h: &Graph, suspect: &LabelSet) -> Matching {
    let labels = &reference.labels;
    let hc = labels.high.len();

    // high: greedy on profile distance
    let suspect_profiles: Vec<Vec<u32>> = suspect.high.iter().map(|x| neighbor_degrees(h, x.vertex)).collect();
    let mut pairs: Vec<(u64, usize, usize)> = (0..hc)
        .flat_map(|i| (0..hc).map(move |j| (i, j)))
        .map(|(i, j)| (profile_distance(&reference.high_profiles[i], &suspect_profiles[j]), i, j))
        .collect();
    pairs.sort_unstable();
    let mut high_images: Vec<Option<VertexId>> = vec![None; hc];
    let mut taken = vec![false; hc];
    for (_, i, j) in pairs {
        if high_images[i].is_none() && !taken[j] {
            high_images[i] = Some(suspect.high[j].vertex);
            taken[j] = true;
        }
    }

    // medium: greedy on Hamming distance against the matched high vertices
    let candidates: Vec<VertexId> = suspect.medium.iter().map(|m| m.vertex).collect();
    let cand_bits = bits_against(h, &high_images, &candidates);
    let medium_images = greedy_hamming(&labels.medium.iter().map(|m| &m.bits).collect::<Vec<_>>(), &cand_bits)
        .into_iter()
        .map(|j| j.map(|j| candidates[j]));

    Matching { images: high_images.into_iter().chain(medium_images).collect() }
}

/// Sorted `(distance, candidate)` list for one source, truncated to `limit`.
fn ranked(source: &BitString, cands: &[BitString], limit: usize) -> Vec<(u32, u32)> {
    let mut all: Vec<(u32, u32)> =
        cands.iter().enumerate().map(|(j, c)| (source.hamming_unchecked(c) as u32, j as u32)).collect();
    if all.len() > limit {
        all.select_nth_unstable(limit - 1);
        all.truncate(limit);
    }
    all.sort_unstable();
    all
}

/// Greedy assignment in ascending `(distance, source, candidate)` order.
/// Each source keeps a short list of its nearest candidates and rescans in
/// full only if all of them are taken, which gives the same result as
/// sorting every pair.
fn greedy_hamming(sources: &[&BitString], cands: &[BitString]) -> Vec<Option<usize>> {
    let mut lists: Vec<Vec<(u32, u32)>> = sources.par_iter().map(|s| ranked(s, cands, SHORTLIST)).collect();
    let mut cursor = vec![0usize; sources.len()];
    let mut out = vec![None; sources.len()];
    let mut taken = vec![false; cands.len()];
    let mut heap = BinaryHeap::new();
    for (i, list) in lists.iter().enumerate() {
        if let Some(&(d, j)) = list.first() {
            heap.push(Reverse((d, i, j)));
        }
    }
    while let Some(Reverse((_, i, j))) = heap.pop() {
        if !taken[j as usize] {
            taken[j as usize] = true;
            out[i] = Some(j as usize);
            continue;
        }
        cursor[i] += 1;
        if cursor[i] == lists[i].len() && lists[i].len() < cands.len() {
            let seen = lists[i].len();
            lists[i] = ranked(sources[i], cands, cands.len());
            cursor[i] = seen;
        }
        if let Some(&(d, j)) = lists[i].get(cursor[i]) {
            heap.push(Reverse((d, i, j)));
        }
    }
    out
}

/// Bit `j` is 1 iff the images of key pair `j` are adjacent in `suspect`.
/// Unmatched endpoints read as 0.
pub fn extract_bits(key: &MarkKey, matching: &Matching, suspect: &Graph) -> Result<BitString, WatermarkError> {
    if key.max_rank() > matching.images.len() {
        return Err(WatermarkError::RankOutOfRange { rank: key.max_rank(), labeled: matching.images.len() });
    }
    let mut bits = BitString::zeros(key.len());
    for (j, &(u, v)) in key.pairs().iter().enumerate() {
        if let (Some(a), Some(b)) = (matching.images[u - 1], matching.images[v - 1]) {
            bits.set(j, a != b && suspect.has_edge(a, b));
        }
    }
    Ok(bits)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IdentifyOptions {
    /// Report ⊥ when the closest id is further than this. Off by default.
    pub max_distance: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Identification {
    Found { index: usize, distance: usize, extracted: BitString },
    /// ⊥: recovery failed.
    Bottom(RecoveryFailure),
}

impl Identification {
    pub fn index(&self) -> Option<usize> {
        match self {
            Identification::Found { index, .. } => Some(*index),
            Identification::Bottom(_) => None,
        }
    }
}

/// Read the id out of `suspect` and return the closest candidate (lowest
/// index on ties).
pub fn identify(
    key: &MarkKey,
    reference: &Reference,
    ids: &[WatermarkId],
    suspect: &Graph,
    options: IdentifyOptions,
) -> Result<Identification, WatermarkError> {
    if ids.is_empty() {
        return Err(WatermarkError::NoIds);
    }
    if let Some(bad) = ids.iter().find(|id| id.len() != key.len()) {
        return Err(WatermarkError::IdLength { expected: key.len(), got: bad.len() });
    }
    if key.max_rank() > reference.labels.len() {
        return Err(WatermarkError::RankOutOfRange { rank: key.max_rank(), labeled: reference.labels.len() });
    }
    let matching = match approximate_isomorphism(reference, suspect) {
        Ok(m) => m,
        Err(f) => return Ok(Identification::Bottom(f)),
    };
    let extracted = extract_bits(key, &matching, suspect)?;
    let (index, distance) = ids
        .iter()
        .map(|id| id.0.hamming_unchecked(&extracted))
        .enumerate()
        .min_by_key(|&(i, d)| (d, i))
        .expect("ids is non-empty");
    if let Some(limit) = options.max_distance {
        if distance > limit {
            return Ok(Identification::Bottom(RecoveryFailure::TooFar { distance, limit }));
        }
    }
    Ok(Identification::Found { index, distance, extracted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexPair;
    use crate::watermark::{keygen, mark, ResampleSource};

    /// Six high vertices with degrees 23, 20, ..., 8 and four medium
    /// vertices whose codewords are pairwise at Hamming distance >= 3.
    fn codeword_graph() -> Graph {
        let codes = ["111000", "000111", "110110", "011011"];
        let mut edges = Vec::new();
        let mut next = 10u32;
        for r in 0..6u32 {
            let target = 23 - 3 * r as usize;
            let mut deg = 0;
            for (i, c) in codes.iter().enumerate() {
                if c.as_bytes()[r as usize] == b'1' {
                    edges.push((r, 6 + i as u32));
                    deg += 1;
                }
            }
            for _ in deg..target {
                edges.push((r, next));
                next += 1;
            }
        }
        Graph::from_edges(next as usize, edges).unwrap()
    }

    fn reference(g: &Graph, mode: LabelMode) -> Reference {
        Reference::new(g, &Thresholds::with_counts(6, 4).unwrap(), mode).unwrap()
    }

    #[test]
    fn identity_on_self() {
        let g = codeword_graph();
        for mode in [LabelMode::Strict, LabelMode::Relaxed] {
            let r = reference(&g, mode);
            let m = approximate_isomorphism(&r, &g).unwrap();
            let expected: Vec<Option<VertexId>> = r.labels().ordered_vertices().into_iter().map(Some).collect();
            assert_eq!(m.images, expected, "{mode}");
        }
    }

    #[test]
    fn one_flip_on_a_medium_vertex_is_absorbed() {
        let g = codeword_graph();
        // drop the edge between the top vertex and the first medium vertex
        let h = g.flip_edge(VertexPair::new(0, 6).unwrap()).unwrap();
        for mode in [LabelMode::Strict, LabelMode::Relaxed] {
            let r = reference(&g, mode);
            let m = approximate_isomorphism(&r, &h).unwrap();
            let expected: Vec<Option<VertexId>> = r.labels().ordered_vertices().into_iter().map(Some).collect();
            assert_eq!(m.images, expected, "{mode}");
        }
    }

    #[test]
    fn relabeled_suspect_maps_through_the_permutation() {
        let g = codeword_graph();
        let n = g.n() as u32;
        let perm: Vec<VertexId> = (0..n).map(|v| (v * 37 + 11) % n).collect();
        let mut check = perm.clone();
        check.sort_unstable();
        assert_eq!(check, (0..n).collect::<Vec<_>>());
        let h = g.permuted(&perm);
        for mode in [LabelMode::Strict, LabelMode::Relaxed] {
            let r = reference(&g, mode);
            let m = approximate_isomorphism(&r, &h).unwrap();
            let expected: Vec<Option<VertexId>> =
                r.labels().ordered_vertices().into_iter().map(|v| Some(perm[v as usize])).collect();
            assert_eq!(m.images, expected);
        }
    }

    #[test]
    fn strict_fails_on_identical_medium_labels() {
        let star = Graph::from_edges(5, (1..5).map(|l| (0, l))).unwrap();
        assert!(Reference::new(&star, &Thresholds::with_counts(1, 4).unwrap(), LabelMode::Strict).is_err());
        // the reference labels fine, the suspect collides
        let g = codeword_graph();
        let r = reference(&g, LabelMode::Strict);
        // move vertex 7 from 000111 onto vertex 6's codeword 111000
        let flips = (0..6).map(|r| VertexPair::new(r, 7).unwrap());
        let h = g.with_flips(flips);
        match approximate_isomorphism(&r, &h) {
            Err(RecoveryFailure::Label(LabelFailure::BitVectorCollision { .. })) => {}
            other => panic!("expected a bit-vector collision, got {other:?}"),
        }
    }

    #[test]
    fn greedy_matches_full_sort() {
        let sources: Vec<BitString> = ["0000", "0001", "0011", "0111", "1111", "0001"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let cands: Vec<BitString> =
            ["0001", "1111", "0000", "1000", "0110", "0011"].iter().map(|s| s.parse().unwrap()).collect();
        let refs: Vec<&BitString> = sources.iter().collect();
        // reference: sort all pairs
        let mut all: Vec<(usize, usize, usize)> = Vec::new();
        for (i, s) in sources.iter().enumerate() {
            for (j, c) in cands.iter().enumerate() {
                all.push((s.hamming(c).unwrap(), i, j));
            }
        }
        all.sort();
        let mut expected = vec![None; sources.len()];
        let mut taken = vec![false; cands.len()];
        for (_, i, j) in all {
            if expected[i].is_none() && !taken[j] {
                expected[i] = Some(j);
                taken[j] = true;
            }
        }
        assert_eq!(greedy_hamming(&refs, &cands), expected);
    }

    #[test]
    fn round_trip_and_singleton() {
        let g = codeword_graph();
        let r = reference(&g, LabelMode::Strict);
        let key = keygen(5, g.n(), 10, 1, 3).unwrap();
        let copy = mark(&key, &g, r.labels(), &ResampleSource::default(), 9).unwrap();
        let other = WatermarkId::random(5, 1);
        let ids = [other.clone(), copy.id.clone()];
        let found = identify(&key, &r, &ids, &copy.graph, IdentifyOptions::default()).unwrap();
        match &found {
            Identification::Found { distance, extracted, .. } => {
                assert_eq!(*distance, 0);
                assert_eq!(extracted, &copy.id.0);
            }
            Identification::Bottom(f) => panic!("{f}"),
        }
        if other != copy.id {
            assert_eq!(found.index(), Some(1));
        }
        // a single candidate is returned however far it is
        let flipped = copy.id.0.iter().map(|b| !b).collect::<Vec<_>>();
        let (far, _) =
            super::super::mark_with_id(&key, &g, r.labels(), &WatermarkId(BitString::from_bools(&flipped))).unwrap();
        let res = identify(&key, &r, std::slice::from_ref(&copy.id), &far, IdentifyOptions::default()).unwrap();
        assert_eq!(res.index(), Some(0));
        let cut = identify(&key, &r, std::slice::from_ref(&copy.id), &far, IdentifyOptions { max_distance: Some(2) }).unwrap();
        assert!(matches!(cut, Identification::Bottom(RecoveryFailure::TooFar { .. })));
    }

    #[test]
    fn resized_suspect_is_bottom() {
        let g = codeword_graph();
        let r = reference(&g, LabelMode::Relaxed);
        let key = keygen(3, g.n(), 10, 1, 0).unwrap();
        let ids = [WatermarkId::random(3, 0)];
        let bigger = Graph::from_edges(g.n() + 1, g.edges().map(|p| (p.u(), p.v()))).unwrap();
        let res = identify(&key, &r, &ids, &bigger, IdentifyOptions::default()).unwrap();
        assert!(matches!(res, Identification::Bottom(RecoveryFailure::SizeMismatch { .. })));
    }

    #[test]
    fn identify_argument_errors() {
        let g = codeword_graph();
        let r = reference(&g, LabelMode::Relaxed);
        let key = keygen(3, g.n(), 10, 1, 0).unwrap();
        assert_eq!(identify(&key, &r, &[], &g, IdentifyOptions::default()), Err(WatermarkError::NoIds));
        assert_eq!(
            identify(&key, &r, &["01".parse().unwrap()], &g, IdentifyOptions::default()),
            Err(WatermarkError::IdLength { expected: 3, got: 2 })
        );
    }

    #[test]
    fn ties_go_to_the_lowest_index() {
        let g = codeword_graph();
        let r = reference(&g, LabelMode::Relaxed);
        let key = keygen(4, g.n(), 10, 1, 5).unwrap();
        let a: WatermarkId = "0000".parse().unwrap();
        let b: WatermarkId = "1111".parse().unwrap();
        let (h, _) = super::super::mark_with_id(&key, &g, r.labels(), &"0011".parse().unwrap()).unwrap();
        let res = identify(&key, &r, &[b, a], &h, IdentifyOptions::default()).unwrap();
        assert_eq!(res.index(), Some(0));
    }
}
