//! Ising model with a global magnetization penalty.
//!
//! For a spin configuration `s` on a graph the energy is
//!
//! ```text
//! H(s) = - sum_{edges {u,v}} s(u) s(v) + (alpha_n / 2) * (sum_u s(u))^2
//! ```
//!
//! Aligned neighbors lower the energy while the quadratic term penalises a
//! large net magnetization, steering the dynamics away from the
//! all-equal configurations. `alpha_n = alpha * lambda / n` keeps the penalty
//! comparable to a node's typical neighborhood weight.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::Spin;
use crate::sbm::Graph;

#[derive(Debug, Error)]
pub enum IsingError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("operation undefined at infinite beta")]
    InfiniteBeta,
    #[error("spin vector invalid: {0}")]
    BadSpins(String),
}

/// Inverse temperature and penalty strength of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    /// Penalty on the `(a, b)` scale; informational.
    pub alpha: f64,
    /// Penalty per spin pair, `alpha * lambda / n`; this is what the energy
    /// and the dynamics actually use.
    pub alpha_n: f64,
    /// Inverse temperature; `f64::INFINITY` selects the zero-temperature
    /// rule (flip iff the energy does not increase).
    pub beta: f64,
}

impl IsingParams {
    /// Builds from model-scale inputs: `alpha_n = alpha * lambda / n`.
    pub fn from_model(alpha: f64, lambda: f64, n: usize, beta: f64) -> Result<Self, IsingError> {
        if n == 0 || !(lambda > 0.0) {
            return Err(IsingError::InvalidParameters(
                "scale n and lambda must be positive".into(),
            ));
        }
        Self::from_alpha_n_scaled(alpha, alpha * lambda / n as f64, beta)
    }

    /// Builds directly from the per-pair penalty; `alpha` is recorded equal
    /// to `alpha_n` (unit scale).
    pub fn from_alpha_n(alpha_n: f64, beta: f64) -> Result<Self, IsingError> {
        Self::from_alpha_n_scaled(alpha_n, alpha_n, beta)
    }

    fn from_alpha_n_scaled(alpha: f64, alpha_n: f64, beta: f64) -> Result<Self, IsingError> {
        if !alpha_n.is_finite() {
            return Err(IsingError::InvalidParameters(format!(
                "alpha_n must be finite, got {alpha_n}"
            )));
        }
        if !(beta > 0.0) {
            return Err(IsingError::InvalidParameters(format!(
                "beta must be positive (possibly infinite), got {beta}"
            )));
        }
        Ok(Self {
            alpha,
            alpha_n,
            beta,
        })
    }

    pub fn zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }
}

/// Total energy of a raw spin vector; recomputed from scratch in O(V + E).
pub fn energy(graph: &Graph, spins: &[Spin], params: &IsingParams) -> f64 {
    debug_assert_eq!(spins.len(), graph.node_count());
    let mut edge_sum: i64 = 0;
    for (u, v) in graph.edges() {
        edge_sum += (spins[u as usize] * spins[v as usize]) as i64;
    }
    let total: i64 = spins.iter().map(|&s| s as i64).sum();
    -(edge_sum as f64) + 0.5 * params.alpha_n * (total * total) as f64
}

/// A spin configuration with the caches needed for O(1) update proposals:
/// per-node neighbor spin sums, the total spin, and per-community counts of
/// positive spins. At zero temperature it can additionally track how many
/// nodes could still flip, to detect frozen states.
#[derive(Debug, Clone)]
pub struct SpinState {
    v1: usize,
    v2: usize,
    spins: Vec<Spin>,
    neighbor_sum: Vec<i32>,
    total_spin: i64,
    pos_counts: [usize; 2],
    pinned: Option<Vec<bool>>,
    freeze: Option<FreezeTracker>,
}

/// Zero-temperature bookkeeping. With no magnetization penalty a node's
/// flippability depends only on its own neighborhood, so the tracker stays
/// exact under O(deg) updates per flip. With a penalty every node's energy
/// difference shifts whenever the total spin moves, so the count is instead
/// refreshed by full scans (the dynamics re-scan once per sweep).
#[derive(Debug, Clone)]
struct FreezeTracker {
    alpha_n: f64,
    /// Exact incremental maintenance (only possible when `alpha_n == 0`).
    exact: bool,
    flippable: Vec<bool>,
    count: usize,
}

impl SpinState {
    /// Builds the caches for a given spin vector (entries must be +1 or -1).
    pub fn from_spins(graph: &Graph, spins: Vec<Spin>) -> Result<Self, IsingError> {
        if spins.len() != graph.node_count() {
            return Err(IsingError::BadSpins(format!(
                "length {} != node count {}",
                spins.len(),
                graph.node_count()
            )));
        }
        if let Some(u) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(IsingError::BadSpins(format!(
                "spin at node {u} is {}, expected +1 or -1",
                spins[u]
            )));
        }
        let (v1, v2) = graph.community_sizes();
        let mut neighbor_sum = vec![0i32; spins.len()];
        for (u, s) in spins.iter().enumerate() {
            let mut sum = 0i32;
            for &v in graph.neighbors(u) {
                sum += spins[v as usize] as i32;
            }
            neighbor_sum[u] = sum;
            let _ = s;
        }
        let total_spin = spins.iter().map(|&s| s as i64).sum();
        let mut pos_counts = [0usize; 2];
        for (u, &s) in spins.iter().enumerate() {
            if s == 1 {
                pos_counts[if u < v1 { 0 } else { 1 }] += 1;
            }
        }
        Ok(Self {
            v1,
            v2,
            spins,
            neighbor_sum,
            total_spin,
            pos_counts,
            pinned: None,
            freeze: None,
        })
    }

    pub fn node_count(&self) -> usize {
        self.spins.len()
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn spin(&self, u: usize) -> Spin {
        self.spins[u]
    }

    /// Sum of the spins adjacent to `u`.
    pub fn neighbor_spin_sum(&self, u: usize) -> i32 {
        self.neighbor_sum[u]
    }

    pub fn total_spin(&self) -> i64 {
        self.total_spin
    }

    /// Counts of +1 spins per community.
    pub fn positive_counts(&self) -> (usize, usize) {
        (self.pos_counts[0], self.pos_counts[1])
    }

    /// Community magnetizations `(z1, z2)`, each in `[-1, 1]`.
    pub fn magnetization(&self) -> (f64, f64) {
        let z = |pos: usize, size: usize| (2.0 * pos as f64 - size as f64) / size as f64;
        (
            z(self.pos_counts[0], self.v1),
            z(self.pos_counts[1], self.v2),
        )
    }

    /// Marks nodes that the dynamics must never flip.
    pub fn set_pinned(&mut self, mask: Vec<bool>) {
        debug_assert_eq!(mask.len(), self.spins.len());
        self.pinned = Some(mask);
        if self.freeze.is_some() {
            self.refresh_flippable_full();
        }
    }

    pub fn is_pinned(&self, u: usize) -> bool {
        self.pinned.as_ref().is_some_and(|m| m[u])
    }

    /// Flips node `u`, updating every cache in O(deg(u)).
    pub fn flip(&mut self, graph: &Graph, u: usize) {
        let old = self.spins[u];
        let new = -old;
        self.spins[u] = new;
        self.total_spin += 2 * new as i64;
        for &v in graph.neighbors(u) {
            self.neighbor_sum[v as usize] += 2 * new as i32;
        }
        let c = if u < self.v1 { 0 } else { 1 };
        if new == 1 {
            self.pos_counts[c] += 1;
        } else {
            self.pos_counts[c] -= 1;
        }
        if let Some(tracker) = &mut self.freeze {
            if tracker.exact {
                let mut update =
                    |node: usize, spins: &[Spin], sums: &[i32], pinned: &Option<Vec<bool>>| {
                        let now = !pinned.as_ref().is_some_and(|m| m[node])
                            && (spins[node] as i32) * sums[node] <= 0;
                        if now != tracker.flippable[node] {
                            tracker.flippable[node] = now;
                            if now {
                                tracker.count += 1;
                            } else {
                                tracker.count -= 1;
                            }
                        }
                    };
                update(u, &self.spins, &self.neighbor_sum, &self.pinned);
                for &v in graph.neighbors(u) {
                    update(v as usize, &self.spins, &self.neighbor_sum, &self.pinned);
                }
            }
        }
    }

    /// Enables frozen-state tracking for the zero-temperature dynamics under
    /// the given penalty. Counts nodes whose flip would not raise the energy.
    pub fn enable_freeze_tracking(&mut self, alpha_n: f64) {
        self.freeze = Some(FreezeTracker {
            alpha_n,
            exact: alpha_n == 0.0,
            flippable: vec![false; self.spins.len()],
            count: 0,
        });
        self.refresh_flippable_full();
    }

    /// Number of unpinned nodes with a non-positive flip energy difference,
    /// if tracking is enabled. Exact after every flip when `alpha_n == 0`;
    /// otherwise exact as of the last `refresh_flippable_full`.
    pub fn flippable_count(&self) -> Option<usize> {
        self.freeze.as_ref().map(|t| t.count)
    }

    /// Whether the penalty allows exact incremental flippability updates.
    pub fn freeze_tracking_is_exact(&self) -> bool {
        self.freeze.as_ref().is_some_and(|t| t.exact)
    }

    /// Recounts flippable nodes by a full O(V) scan.
    pub fn refresh_flippable_full(&mut self) {
        let Some(tracker) = self.freeze.take() else {
            return;
        };
        let alpha_n = tracker.alpha_n;
        let mut flippable = tracker.flippable;
        let mut count = 0;
        for (u, slot) in flippable.iter_mut().enumerate() {
            let ok = !self.is_pinned(u) && {
                let s = self.spins[u] as f64;
                let delta = if alpha_n == 0.0 {
                    (2 * self.spins[u] as i32 * self.neighbor_sum[u]) as f64
                } else {
                    2.0 * s
                        * (self.neighbor_sum[u] as f64
                            - alpha_n * (self.total_spin - self.spins[u] as i64) as f64)
                };
                delta <= 0.0
            };
            *slot = ok;
            count += ok as usize;
        }
        self.freeze = Some(FreezeTracker {
            alpha_n,
            exact: tracker.exact,
            flippable,
            count,
        });
    }
}

/// Energy difference `H(s with u flipped) - H(s)`, in O(1) from the caches:
///
/// ```text
/// delta = 2 s(u) [ S_u - alpha_n (T - s(u)) ]
/// ```
///
/// with `S_u` the neighbor spin sum and `T` the total spin. With no penalty
/// the value is computed in integer arithmetic, so zero-temperature ties
/// (`delta == 0`) are exact rather than a float coincidence.
pub fn energy_delta(state: &SpinState, u: usize, params: &IsingParams) -> f64 {
    let s = state.spins[u];
    if params.alpha_n == 0.0 {
        (2 * s as i64 * state.neighbor_sum[u] as i64) as f64
    } else {
        2.0 * s as f64
            * (state.neighbor_sum[u] as f64 - params.alpha_n * (state.total_spin - s as i64) as f64)
    }
}

/// Glauber flip rate for an energy difference `delta`.
///
/// Finite `beta`: `1 / (1 + exp(beta * delta))`, the heat-bath rate, which
/// satisfies `r(x) + r(-x) = 1` and detailed balance. Infinite `beta`:
/// `1` if the flip lowers the energy, `1/2` on a tie, `0` otherwise.
pub fn flip_rate(beta: f64, delta: f64) -> f64 {
    if beta.is_infinite() {
        if delta < 0.0 {
            1.0
        } else if delta == 0.0 {
            0.5
        } else {
            0.0
        }
    } else {
        1.0 / (1.0 + (beta * delta).exp())
    }
}

/// The penalty strength at which the energy is the exact negative
/// log-likelihood of the community assignment given the graph:
///
/// ```text
/// rho_n = [log(1 - a_n) - log(1 - b_n)]
///       / [log(b_n (1 - a_n)) - log(a_n (1 - b_n))]
/// ```
///
/// Diagnostic only; the dynamics do not consume it. Requires
/// `0 < b_n < a_n < 1`.
pub fn rho_n(a_n: f64, b_n: f64) -> Result<f64, IsingError> {
    if !(b_n > 0.0 && a_n > b_n && a_n < 1.0) {
        return Err(IsingError::InvalidParameters(format!(
            "need 0 < b_n < a_n < 1, got a_n = {a_n}, b_n = {b_n}"
        )));
    }
    let num = (-a_n).ln_1p() - (-b_n).ln_1p();
    let den = b_n.ln() + (-a_n).ln_1p() - a_n.ln() - (-b_n).ln_1p();
    Ok(num / den)
}

/// Unnormalised Gibbs weight `exp(-beta * H(s))`. Undefined at infinite
/// beta, where the measure degenerates onto the energy minima.
pub fn gibbs_weight(
    graph: &Graph,
    spins: &[Spin],
    params: &IsingParams,
) -> Result<f64, IsingError> {
    if params.zero_temperature() {
        return Err(IsingError::InfiniteBeta);
    }
    Ok((-params.beta * energy(graph, spins, params)).exp())
}
