//! Glauber dynamics for the penalised Ising model.
//!
//! The continuous-time chain gives every node an independent clock; node `u`
//! flips at rate `r(beta * delta_u)`. Simulation uses uniformization: a
//! global exponential clock of rate `V` proposes a uniformly random node,
//! and the proposal is accepted with probability equal to the node's rate
//! (all rates are at most 1). This reproduces the continuous-time law
//! exactly. The discrete-time variant performs one such proposal per step;
//! both chains share the same jump distribution.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::ising::{energy_delta, flip_rate, IsingParams, SpinState};
use crate::labels::{RevealedLabels, Spin};
use crate::rng::{stream_rng, Stream};
use crate::sbm::Graph;

/// Probability that a revealed label lies about each community.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleNoise {
    pub q1: f64,
    pub q2: f64,
}

impl OracleNoise {
    pub fn none() -> Self {
        Self { q1: 0.0, q2: 0.0 }
    }
}

/// Time scale of a run: continuous (uniformized CTMC over `[0, t_end]`) or
/// discrete (`t_end` proposal slots, one node pick each).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Continuous,
    Discrete,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// Reached the time horizon / slot budget.
    TimeEnd,
    /// Zero temperature and no node can flip any more.
    Frozen,
    /// Hit the proposal cap.
    ProposalBudget,
    /// Hit the accepted-flip cap.
    FlipBudget,
}

/// Everything a single dynamics run needs besides the graph and the state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimParams {
    pub ising: IsingParams,
    pub mode: Mode,
    /// Continuous mode: time horizon. Discrete mode: number of proposal
    /// slots (rounded down).
    pub t_end: f64,
    /// Observation times (continuous) or slot counts (discrete), ascending.
    /// When empty the trajectory records the final state only.
    pub sample_times: Vec<f64>,
    /// Optional cap on proposals (uniformization steps).
    pub max_proposals: Option<u64>,
    /// Optional cap on accepted flips.
    pub max_flips: Option<u64>,
    /// Forbid flips of revealed nodes (ablation; off by default).
    pub pin_revealed: bool,
    pub seed: u64,
}

impl SimParams {
    pub fn new(ising: IsingParams, mode: Mode, t_end: f64, seed: u64) -> Self {
        Self {
            ising,
            mode,
            t_end,
            sample_times: Vec::new(),
            max_proposals: None,
            max_flips: None,
            pin_revealed: false,
            seed,
        }
    }
}

/// Sampled path of the community magnetizations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
    /// Proposals made (uniformization steps or discrete slots).
    pub proposed_updates: u64,
    /// Proposals that flipped a spin.
    pub accepted_flips: u64,
    /// Time of the last flip before the chain froze, when it froze.
    pub frozen_at: Option<f64>,
    pub stop: StopReason,
    pub final_spins: Vec<Spin>,
}

impl Trajectory {
    pub fn final_z(&self) -> (f64, f64) {
        (*self.z1.last().unwrap(), *self.z2.last().unwrap())
    }
}

/// Draws the revealed set: each node independently with probability `eta`;
/// a revealed node claims its true community, except with probability `q_k`
/// (community k) the claim is flipped.
pub fn reveal_labels(graph: &Graph, eta: f64, noise: OracleNoise, seed: u64) -> RevealedLabels {
    debug_assert!((0.0..=1.0).contains(&eta));
    let mut rng = stream_rng(seed, Stream::Reveal);
    let mut entries = Vec::new();
    for u in 0..graph.node_count() {
        if rng.random::<f64>() < eta {
            let truth = graph.truth_spin(u);
            let q = if graph.community(u) == 1 {
                noise.q1
            } else {
                noise.q2
            };
            let claim = if rng.random::<f64>() < q {
                -truth
            } else {
                truth
            };
            entries.push((u as u32, claim));
        }
    }
    RevealedLabels::new(entries)
}

/// Initial state given a revealed set: revealed nodes start at their claimed
/// spin, all others uniformly at +1 or -1. `pin` freezes the revealed nodes
/// for the whole run.
pub fn seed_spins_from(
    graph: &Graph,
    revealed: &RevealedLabels,
    seed: u64,
    pin: bool,
) -> SpinState {
    let mut rng = stream_rng(seed, Stream::SpinInit);
    let claims = revealed.spin_map(graph.node_count());
    let spins: Vec<Spin> = claims
        .iter()
        .map(|&c| {
            if c != 0 {
                c
            } else if rng.random::<bool>() {
                1
            } else {
                -1
            }
        })
        .collect();
    let mut state = SpinState::from_spins(graph, spins).expect("seeded spins are valid");
    if pin {
        state.set_pinned(revealed.mask(graph.node_count()));
    }
    state
}

/// Reveals labels and seeds spins in one step.
pub fn seed_spins(
    graph: &Graph,
    eta: f64,
    noise: OracleNoise,
    seed: u64,
) -> (RevealedLabels, SpinState) {
    let revealed = reveal_labels(graph, eta, noise, seed);
    let state = seed_spins_from(graph, &revealed, seed, false);
    (revealed, state)
}

/// Runs the dynamics in the mode given by `params`.
pub fn run(graph: &Graph, state: SpinState, params: &SimParams) -> Trajectory {
    run_observed(graph, state, params, |_, _| {})
}

/// Continuous-time run regardless of `params.mode`.
pub fn run_continuous(graph: &Graph, state: SpinState, params: &SimParams) -> Trajectory {
    let mut p = params.clone();
    p.mode = Mode::Continuous;
    run(graph, state, &p)
}

/// Discrete-time run regardless of `params.mode`.
pub fn run_discrete(graph: &Graph, state: SpinState, params: &SimParams) -> Trajectory {
    let mut p = params.clone();
    p.mode = Mode::Discrete;
    run(graph, state, &p)
}

/// Runs the dynamics, invoking `observe(t, &state)` at every recorded sample
/// time. The verification oracle uses the hook to collect raw configurations
/// from exactly the dynamics the library ships.
pub fn run_observed<F: FnMut(f64, &SpinState)>(
    graph: &Graph,
    mut state: SpinState,
    params: &SimParams,
    mut observe: F,
) -> Trajectory {
    let v = graph.node_count();
    assert!(v > 0, "dynamics need a nonempty graph");
    assert!(params.t_end >= 0.0, "t_end must be nonnegative");
    let mut rng = stream_rng(params.seed, Stream::Dynamics);
    let zero_temp = params.ising.zero_temperature();
    if zero_temp {
        state.enable_freeze_tracking(params.ising.alpha_n);
    }
    // Exact incremental freeze detection is only available without the
    // penalty; otherwise re-scan once per sweep's worth of proposals.
    let scan_every = if zero_temp && !state.freeze_tracking_is_exact() {
        Some(v as u64)
    } else {
        None
    };

    let mut samples: Vec<f64> = params
        .sample_times
        .iter()
        .copied()
        .filter(|&t| t >= 0.0 && t <= params.t_end)
        .collect();
    if samples.is_empty() {
        samples.push(params.t_end);
    }
    struct Recorder {
        samples: Vec<f64>,
        next: usize,
        times: Vec<f64>,
        z1: Vec<f64>,
        z2: Vec<f64>,
    }
    impl Recorder {
        /// Records every pending sample time up to `upto`; `strict` excludes
        /// `upto` itself (used just before an event so that samples at the
        /// event time see the post-event state: the path is right-continuous).
        fn through<F: FnMut(f64, &SpinState)>(
            &mut self,
            upto: f64,
            strict: bool,
            state: &SpinState,
            observe: &mut F,
        ) {
            while self.next < self.samples.len() {
                let s = self.samples[self.next];
                if s > upto || (strict && s == upto) {
                    break;
                }
                let (z1, z2) = state.magnetization();
                self.times.push(s);
                self.z1.push(z1);
                self.z2.push(z2);
                observe(s, state);
                self.next += 1;
            }
        }
    }
    let mut rec = Recorder {
        samples,
        next: 0,
        times: Vec::new(),
        z1: Vec::new(),
        z2: Vec::new(),
    };

    let mut t = 0.0f64;
    let mut proposed: u64 = 0;
    let mut accepted: u64 = 0;
    let mut last_flip_at = 0.0f64;
    let mut frozen_at = None;
    let discrete = params.mode == Mode::Discrete;
    let slot_budget = if discrete {
        params.t_end.floor() as u64
    } else {
        0
    };

    let stop = loop {
        if zero_temp && state.flippable_count() == Some(0) {
            frozen_at = Some(if accepted == 0 { 0.0 } else { last_flip_at });
            break StopReason::Frozen;
        }
        if params.max_proposals.is_some_and(|cap| proposed >= cap) {
            break StopReason::ProposalBudget;
        }
        if params.max_flips.is_some_and(|cap| accepted >= cap) {
            break StopReason::FlipBudget;
        }
        // Advance the clock to the next proposal.
        let t_next = if discrete {
            if proposed >= slot_budget {
                t = slot_budget as f64;
                break StopReason::TimeEnd;
            }
            t + 1.0
        } else {
            let e: f64 = Exp1.sample(&mut rng);
            t + e / v as f64
        };
        if !discrete && t_next > params.t_end {
            t = params.t_end;
            break StopReason::TimeEnd;
        }
        // Samples strictly before the event see the pre-event configuration.
        rec.through(t_next, true, &state, &mut observe);
        t = t_next;
        let u = rng.random_range(0..v);
        proposed += 1;
        if !state.is_pinned(u) {
            let delta = energy_delta(&state, u, &params.ising);
            let rate = flip_rate(params.ising.beta, delta);
            let accept = if rate >= 1.0 {
                true
            } else if rate <= 0.0 {
                false
            } else {
                rng.random::<f64>() < rate
            };
            if accept {
                state.flip(graph, u);
                accepted += 1;
                last_flip_at = t;
            }
        }
        if let Some(every) = scan_every {
            if proposed.is_multiple_of(every) {
                state.refresh_flippable_full();
            }
        }
        // Samples landing exactly on the event time see the new state.
        rec.through(t, false, &state, &mut observe);
    };

    // A frozen chain no longer moves, so the remaining sample times read the
    // final state; a horizon stop has already passed every sample time. A
    // budget stop truncates instead: later times were never simulated.
    if matches!(stop, StopReason::Frozen | StopReason::TimeEnd) {
        rec.through(f64::INFINITY, false, &state, &mut observe);
    }
    if rec.times.is_empty() {
        let (z1, z2) = state.magnetization();
        rec.times.push(t.min(params.t_end));
        rec.z1.push(z1);
        rec.z2.push(z2);
    }

    Trajectory {
        times: rec.times,
        z1: rec.z1,
        z2: rec.z2,
        proposed_updates: proposed,
        accepted_flips: accepted,
        frozen_at,
        stop,
        final_spins: state.spins().to_vec(),
    }
}

/// Classification quality of labels against the ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    /// Misclassified fraction of community 1 (undecided counts as wrong).
    pub err1: f64,
    /// Misclassified fraction of community 2.
    pub err2: f64,
    /// Size-weighted total misclassified fraction.
    pub err_total: f64,
    /// `max(|z1 - 1|, |z2 + 1|)` of the label values.
    pub max_dev: f64,
}

/// Error metrics of a label vector (`+1`, `-1`, or `0` = undecided).
pub fn classification_error(graph: &Graph, labels: &[Spin]) -> ErrorMetrics {
    debug_assert_eq!(labels.len(), graph.node_count());
    let (v1, v2) = graph.community_sizes();
    let mut wrong = [0usize; 2];
    let mut value_sum = [0i64; 2];
    for (u, &l) in labels.iter().enumerate() {
        let c = if u < v1 { 0 } else { 1 };
        if l != graph.truth_spin(u) {
            wrong[c] += 1;
        }
        value_sum[c] += l as i64;
    }
    let err1 = wrong[0] as f64 / v1 as f64;
    let err2 = wrong[1] as f64 / v2 as f64;
    let z1 = value_sum[0] as f64 / v1 as f64;
    let z2 = value_sum[1] as f64 / v2 as f64;
    ErrorMetrics {
        err1,
        err2,
        err_total: (wrong[0] + wrong[1]) as f64 / (v1 + v2) as f64,
        max_dev: (z1 - 1.0).abs().max((z2 + 1.0).abs()),
    }
}

/// Error metrics from the magnetization pair alone (spins all decided):
/// `err_k = (1 - s_k z_k) / 2` with `s_1 = +1`, `s_2 = -1`.
pub fn classification_error_from_z(v1: usize, v2: usize, z1: f64, z2: f64) -> ErrorMetrics {
    let err1 = (1.0 - z1) / 2.0;
    let err2 = (1.0 + z2) / 2.0;
    ErrorMetrics {
        err1,
        err2,
        err_total: (v1 as f64 * err1 + v2 as f64 * err2) / (v1 + v2) as f64,
        max_dev: (z1 - 1.0).abs().max((z2 + 1.0).abs()),
    }
}
