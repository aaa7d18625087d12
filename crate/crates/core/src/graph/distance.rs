//! Graph edit distance and vertex distance.
//!
//! The exact forms minimize over every bijection between the vertex sets and
//! are only usable on tiny graphs. The identity forms fix the correspondence
//! and give upper bounds on the exact values.

use super::{symmetric_difference_len, Graph, GraphError};

/// Largest vertex count accepted by the exact (n!) searches.
pub const EXACT_SEARCH_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdentityDistances {
    pub edit: usize,
    pub vertex: usize,
}

fn check_sizes(g: &Graph, h: &Graph) -> Result<(), GraphError> {
    if g.n() != h.n() {
        return Err(GraphError::SizeMismatch { left: g.n(), right: h.n() });
    }
    Ok(())
}

fn check_exact(g: &Graph, h: &Graph) -> Result<(), GraphError> {
    check_sizes(g, h)?;
    if g.n() > EXACT_SEARCH_CAP {
        return Err(GraphError::ExactSearchTooLarge { n: g.n(), cap: EXACT_SEARCH_CAP });
    }
    Ok(())
}

fn adjacency_masks(g: &Graph) -> Vec<u16> {
    (0..g.n())
        .map(|v| g.neighbors(v as u32).iter().fold(0u16, |m, &w| m | 1 << w))
        .collect()
}

/// Calls `visit` with every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Per-vertex symmetric difference sizes between `g` and `h` pulled back
/// through `perm` (vertex v of g corresponds to perm[v] of h).
fn mismatch_rows(g_rows: &[u16], h_rows: &[u16], perm: &[usize], out: &mut [u32]) {
    let n = perm.len();
    for v in 0..n {
        let hv = h_rows[perm[v]];
        let mut pulled = 0u16;
        for w in 0..n {
            if hv >> perm[w] & 1 == 1 {
                pulled |= 1 << w;
            }
        }
        out[v] = (g_rows[v] ^ pulled).count_ones();
    }
}

fn exact_search(g: &Graph, h: &Graph, objective: impl Fn(&[u32]) -> usize) -> usize {
    let (gr, hr) = (adjacency_masks(g), adjacency_masks(h));
    let mut rows = vec![0u32; g.n()];
    let mut best = usize::MAX;
    for_each_permutation(g.n(), |perm| {
        if best == 0 {
            return;
        }
        mismatch_rows(&gr, &hr, perm, &mut rows);
        best = best.min(objective(&rows));
    });
    if best == usize::MAX {
        0
    } else {
        best
    }
}

/// Minimum over all bijections of the edge-set symmetric difference.
pub fn edit_distance_exact(g: &Graph, h: &Graph) -> Result<usize, GraphError> {
    check_exact(g, h)?;
    // every mismatched pair is counted from both endpoints
    Ok(exact_search(g, h, |rows| rows.iter().sum::<u32>() as usize / 2))
}

/// Minimum over all bijections of the largest per-vertex mismatch.
pub fn vertex_distance_exact(g: &Graph, h: &Graph) -> Result<usize, GraphError> {
    check_exact(g, h)?;
    Ok(exact_search(g, h, |rows| rows.iter().copied().max().unwrap_or(0) as usize))
}

/// Edit and vertex distance under the identity correspondence.
pub fn identity_distances(g: &Graph, h: &Graph) -> Result<IdentityDistances, GraphError> {
    check_sizes(g, h)?;
    let mut total = 0;
    let mut worst = 0;
    for v in 0..g.n() as u32 {
        let d = symmetric_difference_len(g.neighbors(v), h.neighbors(v));
        total += d;
        worst = worst.max(d);
    }
    Ok(IdentityDistances { edit: total / 2, vertex: worst })
}
