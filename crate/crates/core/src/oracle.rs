//! Brute-force verification tools for the spin-flip machinery on tiny
//! graphs: the exact equilibrium distribution by full enumeration, an
//! empirical long-run check of the simulated dynamics against it, and a
//! reversibility residual over all single-flip transitions.
//!
//! Everything here recomputes energies from scratch out of the edge list,
//! on purpose sharing no arithmetic with the incremental production path
//! it is meant to cross-examine.

use crate::glauber::{run_observed, Mode, SimParams};
use crate::ising::{flip_rate, IsingParams, SpinState};
use crate::rng::{stream_rng, Stream};
use crate::sbm::Graph;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("graph has {nodes} nodes; enumeration is capped at {max}")]
    TooLarge { nodes: usize, max: usize },
    #[error("enumeration needs a finite positive inverse temperature, got {0}")]
    BadBeta(f64),
}

/// Exact equilibrium distribution over all `2^V` spin configurations,
/// kept in the log domain. Configuration index bit `u` set means node `u`
/// carries spin +1.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    log_weights: Vec<f64>,
    log_z: f64,
}

impl ExactDistribution {
    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn log_probability(&self, config: usize) -> f64 {
        self.log_weights[config] - self.log_z
    }

    pub fn probability(&self, config: usize) -> f64 {
        self.log_probability(config).exp()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.len()).map(|c| self.probability(c)).collect()
    }

    /// Total-variation distance to an empirical distribution given as
    /// counts per configuration index.
    pub fn tv_distance(&self, counts: &[u64]) -> f64 {
        assert_eq!(counts.len(), self.len());
        let total: u64 = counts.iter().sum();
        assert!(total > 0, "empirical distribution is empty");
        let mut tv = 0.0;
        for (c, &k) in counts.iter().enumerate() {
            tv += (self.probability(c) - k as f64 / total as f64).abs();
        }
        tv / 2.0
    }
}

/// Spin of node `u` in configuration `config`.
fn config_spin(config: usize, u: usize) -> i64 {
    if config >> u & 1 == 1 {
        1
    } else {
        -1
    }
}

/// Energy of one configuration, from scratch: minus the edgewise agreement
/// plus half the penalty weight times the squared total spin.
fn config_energy(graph: &Graph, config: usize, alpha_n: f64) -> f64 {
    let mut agreement: i64 = 0;
    for (u, v) in graph.edges() {
        agreement += config_spin(config, u as usize) * config_spin(config, v as usize);
    }
    let total: i64 = (0..graph.node_count())
        .map(|u| config_spin(config, u))
        .sum();
    -(agreement as f64) + alpha_n / 2.0 * (total * total) as f64
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

const ENUMERATION_CAP: usize = 20;

/// Enumerates all configurations and returns the exact equilibrium
/// distribution with weights proportional to `e^{-beta * H}`.
pub fn brute_force_gibbs(
    graph: &Graph,
    alpha_n: f64,
    beta: f64,
) -> Result<ExactDistribution, OracleError> {
    let nodes = graph.node_count();
    if nodes > ENUMERATION_CAP {
        return Err(OracleError::TooLarge {
            nodes,
            max: ENUMERATION_CAP,
        });
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(OracleError::BadBeta(beta));
    }
    let log_weights: Vec<f64> = (0..1usize << nodes)
        .map(|config| -beta * config_energy(graph, config, alpha_n))
        .collect();
    let log_z = log_sum_exp(&log_weights);
    Ok(ExactDistribution { log_weights, log_z })
}

const STATIONARITY_CAP: usize = 10;
/// Gap between consecutive long-run samples, chosen large enough that
/// samples on these tiny graphs are close to independent.
pub const STATIONARITY_SPACING: f64 = 5.0;

/// Runs the shipped continuous-time dynamics from a uniformly random
/// configuration, discards `t_burn`, then takes `samples` configurations
/// spaced `STATIONARITY_SPACING` apart and returns the total-variation
/// distance between their empirical distribution and the enumerated one.
pub fn stationarity_check(
    graph: &Graph,
    alpha_n: f64,
    beta: f64,
    t_burn: f64,
    samples: usize,
    seed: u64,
) -> Result<f64, OracleError> {
    let nodes = graph.node_count();
    if nodes > STATIONARITY_CAP {
        return Err(OracleError::TooLarge {
            nodes,
            max: STATIONARITY_CAP,
        });
    }
    assert!(samples > 0 && t_burn >= 0.0);
    let exact = brute_force_gibbs(graph, alpha_n, beta)?;

    let mut rng = stream_rng(seed, Stream::Oracle);
    let spins = (0..nodes)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    let state = SpinState::from_spins(graph, spins).expect("random spins are valid");

    let ising = IsingParams::from_alpha_n(alpha_n, beta).expect("checked above");
    let sample_times: Vec<f64> = (0..samples)
        .map(|k| t_burn + k as f64 * STATIONARITY_SPACING)
        .collect();
    let t_end = *sample_times.last().unwrap() + 1.0;
    let mut params = SimParams::new(ising, Mode::Continuous, t_end, seed);
    params.sample_times = sample_times;

    let mut counts = vec![0u64; 1 << nodes];
    let mut pending = samples;
    run_observed(graph, state, &params, |_, s| {
        if pending > 0 {
            let config = s
                .spins()
                .iter()
                .enumerate()
                .fold(0usize, |acc, (u, &spin)| {
                    acc | (usize::from(spin == 1) << u)
                });
            counts[config] += 1;
            pending -= 1;
        }
    });
    assert_eq!(pending, 0, "dynamics ended before all samples were taken");
    Ok(exact.tv_distance(&counts))
}

const BALANCE_CAP: usize = 12;
const BALANCE_FLOOR: f64 = 1e-300;

/// Worst relative imbalance of probability flow over every single-flip
/// transition: `|pi(s) r(beta dH) - pi(s') r(-beta dH)|` scaled by the
/// forward flow. Zero (up to rounding) exactly when the flip rates are
/// reversible for the enumerated distribution.
pub fn detailed_balance_residual(
    graph: &Graph,
    alpha_n: f64,
    beta: f64,
) -> Result<f64, OracleError> {
    let nodes = graph.node_count();
    if nodes > BALANCE_CAP {
        return Err(OracleError::TooLarge {
            nodes,
            max: BALANCE_CAP,
        });
    }
    let exact = brute_force_gibbs(graph, alpha_n, beta)?;
    let mut worst = 0.0f64;
    for config in 0..1usize << nodes {
        for u in 0..nodes {
            let flipped = config ^ (1 << u);
            let delta =
                config_energy(graph, flipped, alpha_n) - config_energy(graph, config, alpha_n);
            let forward = exact.probability(config) * flip_rate(beta, delta);
            let backward = exact.probability(flipped) * flip_rate(beta, -delta);
            let residual = (forward - backward).abs() / forward.max(BALANCE_FLOOR);
            worst = worst.max(residual);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::{sample_sbm, SbmParams};
    use approx::assert_abs_diff_eq;

    fn tiny(v1: usize, v2: usize, edges: &[(u32, u32)]) -> Graph {
        Graph::from_edges(v1, v2, edges).unwrap()
    }

    fn triangle() -> Graph {
        tiny(2, 1, &[(0, 1), (0, 2), (1, 2)])
    }

    fn four_cycle() -> Graph {
        tiny(2, 2, &[(0, 1), (1, 2), (2, 3), (0, 3)])
    }

    #[test]
    fn triangle_distribution_matches_enumeration_by_hand() {
        // Monochromatic configurations weigh e^3 each, all six others
        // e^{-1}; so the ratio is exactly e^4.
        let dist = brute_force_gibbs(&triangle(), 0.0, 1.0).unwrap();
        let mono = 0.473_957_496_913_757_8;
        let mixed = 0.008_680_834_362_080_733;
        assert_abs_diff_eq!(dist.probability(0b000), mono, epsilon = 1e-12);
        assert_abs_diff_eq!(dist.probability(0b111), mono, epsilon = 1e-12);
        for config in 1..7 {
            assert_abs_diff_eq!(dist.probability(config), mixed, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(
            dist.probability(0b111) / dist.probability(0b001),
            (4.0f64).exp(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn near_zero_temperature_sharpness_and_infinite_temperature_uniformity() {
        let dist = brute_force_gibbs(&triangle(), 0.0, 1e-9).unwrap();
        let uniform = 1.0 / 8.0;
        let tv: f64 = dist
            .probabilities()
            .iter()
            .map(|p| (p - uniform).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 1e-6, "tv to uniform was {tv}");

        // Large beta concentrates on the two monochromatic minima.
        let dist = brute_force_gibbs(&triangle(), 0.0, 50.0).unwrap();
        assert!(dist.probability(0b000) + dist.probability(0b111) > 1.0 - 1e-12);
    }

    #[test]
    fn single_node_penalty_is_sign_blind() {
        let g = tiny(1, 0, &[]);
        let dist = brute_force_gibbs(&g, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(dist.probability(0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(dist.probability(1), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn probabilities_are_normalized_and_positive() {
        for (seed, alpha_n, beta) in [(1, 0.0, 0.5), (2, 0.3, 2.0), (3, 0.3, 1.0)] {
            let params = SbmParams {
                v1: 4,
                v2: 4,
                n: 8,
                a: 2.0,
                b: 1.0,
                lambda: 2.0,
            };
            let g = sample_sbm(&params, seed).unwrap();
            let dist = brute_force_gibbs(&g, alpha_n, beta).unwrap();
            let sum: f64 = dist.probabilities().iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            assert!(dist.probabilities().iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn global_flip_symmetry_is_exact_without_penalty() {
        let g = four_cycle();
        let dist = brute_force_gibbs(&g, 0.0, 1.3).unwrap();
        let mask = (1usize << g.node_count()) - 1;
        for config in 0..=mask {
            assert_eq!(
                dist.log_weights[config],
                dist.log_weights[!config & mask],
                "config {config:#b}"
            );
        }
    }

    #[test]
    fn enumeration_respects_size_caps() {
        let big = tiny(11, 10, &[]);
        assert!(matches!(
            brute_force_gibbs(&big, 0.0, 1.0),
            Err(OracleError::TooLarge { nodes: 21, max: 20 })
        ));
        assert!(matches!(
            stationarity_check(&tiny(6, 5, &[]), 0.0, 1.0, 1.0, 10, 0),
            Err(OracleError::TooLarge { nodes: 11, max: 10 })
        ));
        assert!(matches!(
            detailed_balance_residual(&tiny(7, 6, &[]), 0.0, 1.0),
            Err(OracleError::TooLarge { nodes: 13, max: 12 })
        ));
        assert!(matches!(
            brute_force_gibbs(&triangle(), 0.0, f64::INFINITY),
            Err(OracleError::BadBeta(_))
        ));
        assert!(matches!(
            brute_force_gibbs(&triangle(), 0.0, 0.0),
            Err(OracleError::BadBeta(_))
        ));
    }

    #[test]
    fn production_rates_balance_the_enumerated_distribution() {
        let cases = [
            (triangle(), 2.0, 0.5),
            (four_cycle(), 1.0, 0.0),
            (four_cycle(), 0.7, 0.3),
        ];
        for (g, beta, alpha_n) in cases {
            let residual = detailed_balance_residual(&g, alpha_n, beta).unwrap();
            assert!(residual < 1e-12, "residual {residual}");
        }
    }

    #[test]
    fn the_balance_check_catches_a_perturbed_rate() {
        // Recompute one transition's imbalance with the forward rate
        // inflated by 1e-3: the residual formula must flag it.
        let g = triangle();
        let (alpha_n, beta) = (0.3, 1.0);
        let dist = brute_force_gibbs(&g, alpha_n, beta).unwrap();
        let config = 0b011;
        let flipped = 0b001;
        let delta = config_energy(&g, flipped, alpha_n) - config_energy(&g, config, alpha_n);
        let forward = dist.probability(config) * flip_rate(beta, delta) * (1.0 + 1e-3);
        let backward = dist.probability(flipped) * flip_rate(beta, -delta);
        let residual = (forward - backward).abs() / forward.max(BALANCE_FLOOR);
        assert!(residual >= 1e-4, "perturbation went unnoticed: {residual}");
    }

    #[test]
    fn long_run_of_the_shipped_dynamics_matches_enumeration() {
        // Desk-scale smoke check; the full-budget version runs with the
        // acceptance suite.
        for (g, alpha_n) in [(triangle(), 0.0), (triangle(), 0.3)] {
            let tv = stationarity_check(&g, alpha_n, 1.0, 20.0, 4000, 7).unwrap();
            assert!(tv < 0.05, "tv {tv} at alpha_n {alpha_n}");
        }
    }
}
