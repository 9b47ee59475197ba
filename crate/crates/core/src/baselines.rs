//! Comparison algorithms that label nodes from revealed seeds plus graph
//! structure: consensus averaging (asynchronous and synchronous), gossip
//! averaging over random edges, generalized Laplacian diffusion, and a
//! Poisson-equation solver.
//!
//! All of them output one label per node; nodes whose score gives no
//! preference stay undecided (`0`), which error metrics count as wrong.

use crate::labels::{RevealedLabels, Spin};
use crate::rng::{stream_rng, Stream};
use crate::sbm::Graph;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("gossip averaging needs at least one edge")]
    NoEdges,
    #[error("damping factor must lie strictly between 0 and 1, got {0}")]
    Damping(f64),
    #[error("degree exponent must lie in [0, 1], got {0}")]
    DegreeExponent(f64),
    #[error("poisson learning needs at least one revealed label")]
    NoRevealed,
}

/// How consensus schedules its updates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConsensusMode {
    /// One uniformly random unrevealed node recomputes its value per
    /// iteration.
    Async,
    /// Every unrevealed node recomputes simultaneously, once per sweep.
    Sync,
}

/// Result of the value-averaging baselines (consensus, gossip).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValueOutcome {
    /// Final per-node value in [-1, 1].
    pub values: Vec<f64>,
    /// Sign of the value; 0 when the value is exactly zero.
    pub labels: Vec<Spin>,
    /// Single-node updates actually performed.
    pub updates: u64,
}

/// Result of the two-column score baselines (Laplacian, Poisson).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreOutcome {
    /// Final per-node scores, one column per community.
    pub scores: Vec<[f64; 2]>,
    /// Column with the larger score (+1 first, -1 second); ties undecided.
    pub labels: Vec<Spin>,
    pub sweeps: u64,
}

fn sign_label(x: f64) -> Spin {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn argmax_label(row: [f64; 2]) -> Spin {
    if row[0] > row[1] {
        1
    } else if row[1] > row[0] {
        -1
    } else {
        0
    }
}

fn seeded_values(graph: &Graph, revealed: &RevealedLabels) -> Vec<f64> {
    let mut values = vec![0.0; graph.node_count()];
    for (u, spin) in revealed.iter() {
        values[u as usize] = spin as f64;
    }
    values
}

fn unrevealed_nodes(graph: &Graph, revealed: &RevealedLabels) -> Vec<u32> {
    let mask = revealed.mask(graph.node_count());
    (0..graph.node_count() as u32)
        .filter(|&u| !mask[u as usize])
        .collect()
}

fn neighbor_mean(graph: &Graph, values: &[f64], u: u32) -> f64 {
    let neighbors = graph.neighbors(u as usize);
    if neighbors.is_empty() {
        return values[u as usize];
    }
    let sum: f64 = neighbors.iter().map(|&v| values[v as usize]).sum();
    sum / neighbors.len() as f64
}

/// Iterative neighborhood averaging from revealed seed values.
///
/// Revealed nodes hold their value fixed; unrevealed nodes start at zero
/// and repeatedly replace their value by the mean over their neighborhood.
/// `iters` counts single-node updates in async mode and whole sweeps in
/// sync mode. Nodes without neighbors keep their current value.
pub fn consensus(
    graph: &Graph,
    revealed: &RevealedLabels,
    mode: ConsensusMode,
    iters: u64,
    seed: u64,
) -> ValueOutcome {
    let mut values = seeded_values(graph, revealed);
    let free = unrevealed_nodes(graph, revealed);
    let mut updates = 0;
    match mode {
        ConsensusMode::Async => {
            if !free.is_empty() {
                let mut rng = stream_rng(seed, Stream::Baseline);
                for _ in 0..iters {
                    let u = free[rng.random_range(0..free.len())];
                    values[u as usize] = neighbor_mean(graph, &values, u);
                    updates += 1;
                }
            }
        }
        ConsensusMode::Sync => {
            let mut next = values.clone();
            for _ in 0..iters {
                for &u in &free {
                    next[u as usize] = neighbor_mean(graph, &values, u);
                }
                std::mem::swap(&mut values, &mut next);
                next.copy_from_slice(&values);
                updates += free.len() as u64;
            }
        }
    }
    let labels = values.iter().map(|&v| sign_label(v)).collect();
    ValueOutcome {
        values,
        labels,
        updates,
    }
}

/// Random pairwise averaging: each pick selects an edge uniformly, averages
/// the two endpoint values, and writes the average into each endpoint whose
/// label was not revealed.
pub fn gossip(
    graph: &Graph,
    revealed: &RevealedLabels,
    picks: u64,
    seed: u64,
) -> Result<ValueOutcome, BaselineError> {
    if graph.edge_count() == 0 {
        return Err(BaselineError::NoEdges);
    }
    let mut values = seeded_values(graph, revealed);
    let fixed = revealed.mask(graph.node_count());
    let mut rng = stream_rng(seed, Stream::Baseline);
    let arcs = 2 * graph.edge_count();
    let mut updates = 0;
    for _ in 0..picks {
        // A uniform arc lands on each undirected edge with equal probability
        // because every edge is stored as exactly two arcs.
        let (u, v) = graph.arc_endpoints(rng.random_range(0..arcs));
        let avg = 0.5 * (values[u as usize] + values[v as usize]);
        for w in [u, v] {
            if !fixed[w as usize] {
                values[w as usize] = avg;
                updates += 1;
            }
        }
    }
    let labels = values.iter().map(|&v| sign_label(v)).collect();
    Ok(ValueOutcome {
        values,
        labels,
        updates,
    })
}

fn one_hot_rows(graph: &Graph, revealed: &RevealedLabels) -> Vec<[f64; 2]> {
    let mut y = vec![[0.0, 0.0]; graph.node_count()];
    for (u, spin) in revealed.iter() {
        if spin > 0 {
            y[u as usize][0] = 1.0;
        } else {
            y[u as usize][1] = 1.0;
        }
    }
    y
}

/// Damped degree-weighted diffusion of revealed one-hot labels.
///
/// Per sweep every row updates to
/// `gamma * d_v^{-delta} * sum_{u ~ v} d_u^{delta - 1} * x_u
///  + (1 - gamma) * y_v`,
/// where `d` are degrees and `y` is one-hot on revealed rows. The exponent
/// selects the diffusion flavor: 0 and 1 give the two degree-normalized
/// extremes and 0.5 the symmetric compromise. Rows of isolated nodes only
/// receive their `y` share; labels are the per-row argmax, ties undecided.
pub fn laplacian_method(
    graph: &Graph,
    revealed: &RevealedLabels,
    gamma: f64,
    delta_exp: f64,
    sweeps: u64,
) -> Result<ScoreOutcome, BaselineError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(BaselineError::Damping(gamma));
    }
    if !(0.0..=1.0).contains(&delta_exp) {
        return Err(BaselineError::DegreeExponent(delta_exp));
    }
    let v = graph.node_count();
    let y = one_hot_rows(graph, revealed);
    let weight = |d: usize, e: f64| if d == 0 { 0.0 } else { (d as f64).powf(e) };
    let w_in: Vec<f64> = (0..v)
        .map(|u| weight(graph.degree(u), -delta_exp))
        .collect();
    let w_out: Vec<f64> = (0..v)
        .map(|u| weight(graph.degree(u), delta_exp - 1.0))
        .collect();
    let mut x = vec![[0.0f64; 2]; v];
    let mut next = vec![[0.0f64; 2]; v];
    for _ in 0..sweeps {
        for u in 0..v {
            let mut acc = [0.0f64; 2];
            for &nb in graph.neighbors(u) {
                let nb = nb as usize;
                acc[0] += w_out[nb] * x[nb][0];
                acc[1] += w_out[nb] * x[nb][1];
            }
            next[u] = [
                gamma * w_in[u] * acc[0] + (1.0 - gamma) * y[u][0],
                gamma * w_in[u] * acc[1] + (1.0 - gamma) * y[u][1],
            ];
        }
        std::mem::swap(&mut x, &mut next);
    }
    let labels = x.iter().map(|&row| argmax_label(row)).collect();
    Ok(ScoreOutcome {
        scores: x,
        labels,
        sweeps,
    })
}

/// Jacobi iteration for the graph-Laplacian Poisson equation whose source
/// is the revealed one-hot labels minus their mean.
///
/// The source rows `b_u = y_u - mean(y over revealed)` sum to zero, and
/// each sweep performs `f_u <- (b_u + sum_{v ~ u} f_v) / d_u` on nodes of
/// positive degree. The iteration preserves the degree-weighted column
/// means (zero), so it converges to the mean-zero solution on connected
/// non-bipartite components; components without revealed nodes keep zero
/// rows and stay undecided.
pub fn poisson_learning(
    graph: &Graph,
    revealed: &RevealedLabels,
    sweeps: u64,
) -> Result<ScoreOutcome, BaselineError> {
    if revealed.is_empty() {
        return Err(BaselineError::NoRevealed);
    }
    let v = graph.node_count();
    let y = one_hot_rows(graph, revealed);
    let m = revealed.len() as f64;
    let mut mean = [0.0f64; 2];
    for (u, _) in revealed.iter() {
        mean[0] += y[u as usize][0] / m;
        mean[1] += y[u as usize][1] / m;
    }
    let mut source = vec![[0.0f64; 2]; v];
    for (u, _) in revealed.iter() {
        let u = u as usize;
        source[u] = [y[u][0] - mean[0], y[u][1] - mean[1]];
    }
    let mut f = vec![[0.0f64; 2]; v];
    let mut next = vec![[0.0f64; 2]; v];
    for _ in 0..sweeps {
        for u in 0..v {
            let d = graph.degree(u);
            if d == 0 {
                next[u] = f[u];
                continue;
            }
            let mut acc = source[u];
            for &nb in graph.neighbors(u) {
                acc[0] += f[nb as usize][0];
                acc[1] += f[nb as usize][1];
            }
            next[u] = [acc[0] / d as f64, acc[1] / d as f64];
        }
        std::mem::swap(&mut f, &mut next);
    }
    let labels = f.iter().map(|&row| argmax_label(row)).collect();
    Ok(ScoreOutcome {
        scores: f,
        labels,
        sweeps,
    })
}

/// Which baseline to run, with its knobs; used by the command-line tools.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub kind: BaselineKind,
    /// Single-node updates (async consensus), edge picks (gossip), or
    /// sweeps (the rest).
    pub iters: u64,
    /// Damping factor for the Laplacian methods.
    pub gamma: f64,
    /// Degree exponent for the Laplacian methods.
    pub delta_exp: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    ConsensusAsync,
    ConsensusSync,
    Gossip,
    Laplacian,
    Poisson,
}

impl BaselineSpec {
    /// Runs the selected baseline and returns its labels.
    pub fn run(
        &self,
        graph: &Graph,
        revealed: &RevealedLabels,
    ) -> Result<Vec<Spin>, BaselineError> {
        Ok(match self.kind {
            BaselineKind::ConsensusAsync => {
                consensus(graph, revealed, ConsensusMode::Async, self.iters, self.seed).labels
            }
            BaselineKind::ConsensusSync => {
                consensus(graph, revealed, ConsensusMode::Sync, self.iters, self.seed).labels
            }
            BaselineKind::Gossip => gossip(graph, revealed, self.iters, self.seed)?.labels,
            BaselineKind::Laplacian => {
                laplacian_method(graph, revealed, self.gamma, self.delta_exp, self.iters)?.labels
            }
            BaselineKind::Poisson => poisson_learning(graph, revealed, self.iters)?.labels,
        })
    }
}

#[cfg(test)]
// Index loops below compare parallel score arrays position by position.
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::sbm::{sample_sbm, SbmParams};
    use approx::assert_abs_diff_eq;

    fn graph_from(v1: usize, v2: usize, edges: &[(u32, u32)]) -> Graph {
        Graph::from_edges(v1, v2, edges).unwrap()
    }

    fn reveal(entries: &[(u32, Spin)]) -> RevealedLabels {
        RevealedLabels::new(entries.to_vec())
    }

    fn test_graph(seed: u64) -> Graph {
        let params = SbmParams {
            v1: 60,
            v2: 40,
            n: 100,
            a: 6.0,
            b: 2.0,
            lambda: 4.0,
        };
        sample_sbm(&params, seed).unwrap()
    }

    #[test]
    fn star_center_takes_leaf_average_in_one_update() {
        let edges = [(0, 1), (0, 2), (0, 3), (0, 4)];
        let g = graph_from(3, 2, &edges);
        let revealed = reveal(&[(1, 1), (2, 1), (3, 1), (4, 1)]);
        let out = consensus(&g, &revealed, ConsensusMode::Async, 1, 7);
        assert_eq!(out.values[0], 1.0);
        assert_eq!(out.labels[0], 1);
        assert_eq!(out.updates, 1);
    }

    #[test]
    fn path_middle_stays_undecided_between_opposite_ends() {
        let g = graph_from(2, 1, &[(0, 1), (1, 2)]);
        let revealed = reveal(&[(0, 1), (2, -1)]);
        for mode in [ConsensusMode::Async, ConsensusMode::Sync] {
            let out = consensus(&g, &revealed, mode, 50, 3);
            assert_eq!(out.values[1], 0.0);
            assert_eq!(out.labels[1], 0);
            assert_eq!(out.values[0], 1.0);
            assert_eq!(out.values[2], -1.0);
        }
    }

    #[test]
    fn isolated_unrevealed_node_stays_undecided() {
        // Node 3 has no edges; node 1 is unrevealed but connected.
        let g = graph_from(2, 2, &[(0, 1), (1, 2)]);
        let revealed = reveal(&[(0, 1), (2, 1)]);
        for mode in [ConsensusMode::Async, ConsensusMode::Sync] {
            let out = consensus(&g, &revealed, mode, 40, 11);
            assert_eq!(out.labels[3], 0);
            assert_eq!(out.labels[1], 1);
        }
    }

    #[test]
    fn sync_consensus_matches_hand_iteration() {
        // 4-path with both ends revealed +1: values propagate inward by
        // exact averaging.
        let g = graph_from(2, 2, &[(0, 1), (1, 2), (2, 3)]);
        let revealed = reveal(&[(0, 1), (3, 1)]);
        let one = consensus(&g, &revealed, ConsensusMode::Sync, 1, 0);
        assert_eq!(one.values, vec![1.0, 0.5, 0.5, 1.0]);
        let two = consensus(&g, &revealed, ConsensusMode::Sync, 2, 0);
        assert_eq!(two.values, vec![1.0, 0.75, 0.75, 1.0]);
    }

    #[test]
    fn consensus_values_stay_bounded() {
        let g = test_graph(21);
        let revealed = reveal(&[(0, 1), (5, 1), (70, -1), (90, -1)]);
        for mode in [ConsensusMode::Async, ConsensusMode::Sync] {
            let out = consensus(&g, &revealed, mode, 200, 5);
            assert!(out.values.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn sync_consensus_is_permutation_equivariant() {
        let g = test_graph(33);
        let v = g.node_count();
        // An arbitrary fixed permutation: reverse the node indices.
        let perm: Vec<u32> = (0..v as u32).rev().collect();
        let edges: Vec<(u32, u32)> = g
            .edges()
            .map(|(u, w)| {
                let (pu, pw) = (perm[u as usize], perm[w as usize]);
                (pu.min(pw), pu.max(pw))
            })
            .collect();
        let permuted = Graph::from_edges(40, 60, &edges).unwrap();
        let revealed = reveal(&[(0, 1), (5, 1), (70, -1), (90, -1)]);
        let revealed_p = reveal(
            &revealed
                .iter()
                .map(|(u, s)| (perm[u as usize], s))
                .collect::<Vec<_>>(),
        );
        let base = consensus(&g, &revealed, ConsensusMode::Sync, 15, 0);
        let moved = consensus(&permuted, &revealed_p, ConsensusMode::Sync, 15, 0);
        for u in 0..v {
            assert_abs_diff_eq!(
                base.values[u],
                moved.values[perm[u] as usize],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn gossip_single_pick_averages_one_edge() {
        let g = graph_from(1, 1, &[(0, 1)]);
        let revealed = reveal(&[(0, 1)]);
        let out = gossip(&g, &revealed, 1, 9).unwrap();
        assert_eq!(out.values[0], 1.0);
        assert_eq!(out.values[1], 0.5);
        assert_eq!(out.labels, vec![1, 1]);
        assert_eq!(out.updates, 1);
    }

    #[test]
    fn gossip_leaves_fully_revealed_edges_alone() {
        let g = graph_from(1, 1, &[(0, 1)]);
        let revealed = reveal(&[(0, 1), (1, -1)]);
        let out = gossip(&g, &revealed, 100, 9).unwrap();
        assert_eq!(out.values, vec![1.0, -1.0]);
        assert_eq!(out.updates, 0);
    }

    #[test]
    fn gossip_requires_edges_and_stays_bounded() {
        let empty = graph_from(2, 2, &[]);
        assert!(matches!(
            gossip(&empty, &reveal(&[(0, 1)]), 10, 0),
            Err(BaselineError::NoEdges)
        ));
        let g = test_graph(55);
        let revealed = reveal(&[(0, 1), (1, 1), (80, -1)]);
        let out = gossip(&g, &revealed, 5000, 4).unwrap();
        assert!(out.values.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn one_diffusion_sweep_reproduces_the_seed_rows() {
        // From the zero state a single sweep leaves (1 - gamma) * y, so
        // labels equal the revealed seeds and everyone else is undecided.
        let g = test_graph(77);
        let revealed = reveal(&[(3, 1), (42, 1), (61, -1)]);
        let out = laplacian_method(&g, &revealed, 0.95, 0.5, 1).unwrap();
        let seeds = revealed.spin_map(g.node_count());
        for u in 0..g.node_count() {
            assert_eq!(out.labels[u], seeds[u]);
        }
    }

    #[test]
    fn diffusion_rejects_bad_knobs() {
        let g = graph_from(1, 1, &[(0, 1)]);
        let revealed = reveal(&[(0, 1)]);
        assert!(matches!(
            laplacian_method(&g, &revealed, 0.0, 0.5, 1),
            Err(BaselineError::Damping(_))
        ));
        assert!(matches!(
            laplacian_method(&g, &revealed, 1.0, 0.5, 1),
            Err(BaselineError::Damping(_))
        ));
        assert!(matches!(
            laplacian_method(&g, &revealed, 0.9, 1.5, 1),
            Err(BaselineError::DegreeExponent(1.5))
        ));
    }

    /// Dense reference: builds the full iteration matrix entrywise and
    /// multiplies it out, sharing no code with the sparse implementation.
    fn dense_diffusion(
        graph: &Graph,
        revealed: &RevealedLabels,
        gamma: f64,
        delta_exp: f64,
        sweeps: u64,
    ) -> Vec<[f64; 2]> {
        let v = graph.node_count();
        let mut adj = vec![vec![0.0f64; v]; v];
        for (a, b) in graph.edges() {
            adj[a as usize][b as usize] = 1.0;
            adj[b as usize][a as usize] = 1.0;
        }
        let deg: Vec<f64> = (0..v).map(|u| graph.degree(u) as f64).collect();
        let mut m = vec![vec![0.0f64; v]; v];
        for r in 0..v {
            for c in 0..v {
                if adj[r][c] > 0.0 && deg[r] > 0.0 && deg[c] > 0.0 {
                    m[r][c] = deg[r].powf(-delta_exp) * adj[r][c] * deg[c].powf(delta_exp - 1.0);
                }
            }
        }
        let mut y = vec![[0.0f64; 2]; v];
        for (u, s) in revealed.iter() {
            y[u as usize][if s > 0 { 0 } else { 1 }] = 1.0;
        }
        let mut x = vec![[0.0f64; 2]; v];
        for _ in 0..sweeps {
            let mut next = vec![[0.0f64; 2]; v];
            for r in 0..v {
                for c in 0..v {
                    next[r][0] += gamma * m[r][c] * x[c][0];
                    next[r][1] += gamma * m[r][c] * x[c][1];
                }
                next[r][0] += (1.0 - gamma) * y[r][0];
                next[r][1] += (1.0 - gamma) * y[r][1];
            }
            x = next;
        }
        x
    }

    #[test]
    fn diffusion_matches_dense_matrix_oracle() {
        let two = graph_from(1, 1, &[(0, 1)]);
        let seeds = reveal(&[(0, 1)]);
        for delta in [0.0, 0.5, 1.0] {
            let sparse = laplacian_method(&two, &seeds, 0.95, delta, 20).unwrap();
            let dense = dense_diffusion(&two, &seeds, 0.95, delta, 20);
            for u in 0..2 {
                assert_abs_diff_eq!(sparse.scores[u][0], dense[u][0], epsilon = 1e-12);
                assert_abs_diff_eq!(sparse.scores[u][1], dense[u][1], epsilon = 1e-12);
            }
        }

        let g = test_graph(91);
        let revealed = reveal(&[(2, 1), (8, 1), (65, -1), (77, -1)]);
        for delta in [0.0, 0.5, 1.0] {
            let sparse = laplacian_method(&g, &revealed, 0.95, delta, 20).unwrap();
            let dense = dense_diffusion(&g, &revealed, 0.95, delta, 20);
            for u in 0..g.node_count() {
                assert_abs_diff_eq!(sparse.scores[u][0], dense[u][0], epsilon = 1e-12);
                assert_abs_diff_eq!(sparse.scores[u][1], dense[u][1], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn diffusion_iterates_settle_monotonically() {
        let g = test_graph(13);
        let revealed = reveal(&[(1, 1), (4, 1), (66, -1), (71, -1)]);
        let score_at = |sweeps: u64| {
            laplacian_method(&g, &revealed, 0.95, 0.5, sweeps)
                .unwrap()
                .scores
        };
        let mut prev = score_at(0);
        let mut gaps = Vec::new();
        for sweeps in 1..=25 {
            let cur = score_at(sweeps);
            let gap = cur
                .iter()
                .zip(&prev)
                .flat_map(|(a, b)| [(a[0] - b[0]).abs(), (a[1] - b[1]).abs()])
                .fold(0.0f64, f64::max);
            gaps.push(gap);
            prev = cur;
        }
        for w in gaps.windows(2).skip(2) {
            assert!(w[1] <= w[0] + 1e-15, "gaps not settling: {gaps:?}");
        }
    }

    #[test]
    fn poisson_labels_a_two_node_graph_from_one_seed_each() {
        let g = graph_from(1, 1, &[(0, 1)]);
        let revealed = reveal(&[(0, 1), (1, -1)]);
        let out = poisson_learning(&g, &revealed, 1).unwrap();
        assert_eq!(out.labels, vec![1, -1]);
    }

    #[test]
    fn poisson_requires_revealed_nodes() {
        let g = graph_from(1, 1, &[(0, 1)]);
        assert!(matches!(
            poisson_learning(&g, &reveal(&[]), 5),
            Err(BaselineError::NoRevealed)
        ));
    }

    /// Dense reference for the Poisson iteration, built from explicit
    /// adjacency and degree matrices.
    fn dense_poisson(graph: &Graph, revealed: &RevealedLabels, sweeps: u64) -> Vec<[f64; 2]> {
        let v = graph.node_count();
        let mut adj = vec![vec![0.0f64; v]; v];
        for (a, b) in graph.edges() {
            adj[a as usize][b as usize] = 1.0;
            adj[b as usize][a as usize] = 1.0;
        }
        let m = revealed.len() as f64;
        let mut mean = [0.0f64; 2];
        for (_, s) in revealed.iter() {
            mean[if s > 0 { 0 } else { 1 }] += 1.0 / m;
        }
        let mut b = vec![[0.0f64; 2]; v];
        for (u, s) in revealed.iter() {
            let row = &mut b[u as usize];
            row[if s > 0 { 0 } else { 1 }] += 1.0;
            row[0] -= mean[0];
            row[1] -= mean[1];
        }
        let mut f = vec![[0.0f64; 2]; v];
        for _ in 0..sweeps {
            let mut next = vec![[0.0f64; 2]; v];
            for r in 0..v {
                let d: f64 = adj[r].iter().sum();
                if d == 0.0 {
                    next[r] = f[r];
                    continue;
                }
                let mut acc = b[r];
                for c in 0..v {
                    acc[0] += adj[r][c] * f[c][0];
                    acc[1] += adj[r][c] * f[c][1];
                }
                next[r] = [acc[0] / d, acc[1] / d];
            }
            f = next;
        }
        f
    }

    #[test]
    fn poisson_matches_dense_iteration_oracle() {
        let params = SbmParams {
            v1: 5,
            v2: 5,
            n: 10,
            a: 2.0,
            b: 1.0,
            lambda: 3.0,
        };
        let g = sample_sbm(&params, 17).unwrap();
        let revealed = reveal(&[(0, 1), (1, 1), (7, -1)]);
        let sparse = poisson_learning(&g, &revealed, 20).unwrap();
        let dense = dense_poisson(&g, &revealed, 20);
        for u in 0..g.node_count() {
            assert_abs_diff_eq!(sparse.scores[u][0], dense[u][0], epsilon = 1e-9);
            assert_abs_diff_eq!(sparse.scores[u][1], dense[u][1], epsilon = 1e-9);
        }
    }

    #[test]
    fn poisson_leaves_seedless_components_undecided() {
        // Nodes 3 and 4 form their own component with no revealed labels.
        let g = graph_from(3, 2, &[(0, 1), (1, 2), (3, 4)]);
        let revealed = reveal(&[(0, 1), (2, -1)]);
        let out = poisson_learning(&g, &revealed, 15).unwrap();
        assert_eq!(out.labels[3], 0);
        assert_eq!(out.labels[4], 0);
        assert_eq!(out.scores[3], [0.0, 0.0]);
    }

    #[test]
    fn baseline_spec_dispatches_every_kind() {
        let g = test_graph(101);
        let revealed = reveal(&[(0, 1), (2, 1), (75, -1), (88, -1)]);
        for kind in [
            BaselineKind::ConsensusAsync,
            BaselineKind::ConsensusSync,
            BaselineKind::Gossip,
            BaselineKind::Laplacian,
            BaselineKind::Poisson,
        ] {
            let spec = BaselineSpec {
                kind,
                iters: 20,
                gamma: 0.95,
                delta_exp: 0.5,
                seed: 1,
            };
            let labels = spec.run(&g, &revealed).unwrap();
            assert_eq!(labels.len(), g.node_count());
        }
    }

    #[test]
    fn baselines_are_deterministic_given_seed() {
        let g = test_graph(5);
        let revealed = reveal(&[(0, 1), (9, 1), (61, -1)]);
        let a1 = consensus(&g, &revealed, ConsensusMode::Async, 500, 42);
        let a2 = consensus(&g, &revealed, ConsensusMode::Async, 500, 42);
        assert_eq!(a1.values, a2.values);
        let g1 = gossip(&g, &revealed, 500, 42).unwrap();
        let g2 = gossip(&g, &revealed, 500, 42).unwrap();
        assert_eq!(g1.values, g2.values);
    }
}
