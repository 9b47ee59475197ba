//! Shared label and spin conventions.
//!
//! Spins are `i8` values in `{+1, -1}`; community 1 has ground-truth spin
//! `+1` and community 2 has `-1`. Classifier outputs reuse the same type with
//! `0` meaning "undecided" (a node the algorithm could not label). Undecided
//! always counts as a misclassification.

use serde::{Deserialize, Serialize};

/// A spin or label value: `+1`, `-1`, or `0` for undecided outputs.
pub type Spin = i8;

/// Ground-truth spin of community `k` (1-based).
pub fn community_spin(k: usize) -> Spin {
    if k == 1 {
        1
    } else {
        -1
    }
}

/// The set of nodes whose labels were revealed to the algorithm, together
/// with the label each node claims. Claims may be wrong when the reveal was
/// noisy; consumers must not assume they match the ground truth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevealedLabels {
    entries: Vec<(u32, Spin)>,
}

impl RevealedLabels {
    /// Builds from `(node, claimed spin)` pairs; sorts by node and drops
    /// duplicate nodes (first claim wins).
    pub fn new(mut entries: Vec<(u32, Spin)>) -> Self {
        entries.sort_by_key(|&(u, _)| u);
        entries.dedup_by_key(|&mut (u, _)| u);
        entries.retain(|&(_, s)| s == 1 || s == -1);
        Self { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, Spin)> + '_ {
        self.entries.iter().copied()
    }

    /// Number of nodes claiming each community: `(claim 1, claim 2)`.
    pub fn claim_counts(&self) -> (usize, usize) {
        let pos = self.entries.iter().filter(|&&(_, s)| s == 1).count();
        (pos, self.entries.len() - pos)
    }

    /// Dense claimed-spin vector (`0` = unrevealed) over `v` nodes.
    pub fn spin_map(&self, v: usize) -> Vec<Spin> {
        let mut map = vec![0; v];
        for &(u, s) in &self.entries {
            map[u as usize] = s;
        }
        map
    }

    /// Dense revealed mask over `v` nodes.
    pub fn mask(&self, v: usize) -> Vec<bool> {
        let mut mask = vec![false; v];
        for &(u, _) in &self.entries {
            mask[u as usize] = true;
        }
        mask
    }
}
