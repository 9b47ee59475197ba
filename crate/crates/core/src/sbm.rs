//! Two-community stochastic block model graphs.
//!
//! A graph over `V = V1 + V2` nodes: indices `[0, V1)` form community 1 and
//! `[V1, V)` community 2. Any two nodes of the same community are adjacent
//! independently with probability `a*lambda/n`, nodes of different
//! communities with probability `b*lambda/n`, where `n` is the model's scale
//! parameter and `a > b >= 0`. Graphs are simple and undirected, stored in
//! compressed sparse row form with ascending neighbor lists.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::labels::{RevealedLabels, Spin};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Error)]
pub enum SbmError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("edge probability {p} out of range for block `{block}`")]
    EdgeProbability { p: f64, block: &'static str },
    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge {
        u: u32,
        v: u32,
        reason: &'static str,
    },
    #[error("estimation undefined: fewer than 2 revealed nodes claim community {community}")]
    EstimationUndefined { community: usize },
    #[error("malformed graph file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parameters of the two-community block model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    /// Size of community 1.
    pub v1: usize,
    /// Size of community 2.
    pub v2: usize,
    /// Scale parameter appearing in the edge probabilities.
    pub n: usize,
    /// Intra-community rate; edge probability `a*lambda/n`.
    pub a: f64,
    /// Inter-community rate; edge probability `b*lambda/n`.
    pub b: f64,
    /// Sparsity factor, e.g. `log n`.
    pub lambda: f64,
}

impl SbmParams {
    pub fn node_count(&self) -> usize {
        self.v1 + self.v2
    }

    /// Edge probability within a community.
    pub fn intra_prob(&self) -> f64 {
        self.a * self.lambda / self.n as f64
    }

    /// Edge probability across communities.
    pub fn inter_prob(&self) -> f64 {
        self.b * self.lambda / self.n as f64
    }

    pub fn validate(&self) -> Result<(), SbmError> {
        if self.v1 == 0 || self.v2 == 0 {
            return Err(SbmError::InvalidParams(
                "both communities must be nonempty".into(),
            ));
        }
        if self.n == 0 {
            return Err(SbmError::InvalidParams("scale n must be positive".into()));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(SbmError::InvalidParams(format!(
                "lambda must be a positive real, got {}",
                self.lambda
            )));
        }
        // a > b is required for the model to favor intra-community edges; the
        // degenerate b = 0 (no cut edges at all) is allowed.
        if !(self.a > self.b) || !(self.b >= 0.0) || !self.a.is_finite() {
            return Err(SbmError::InvalidParams(format!(
                "need a > b >= 0, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        for (p, block) in [(self.intra_prob(), "intra"), (self.inter_prob(), "inter")] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SbmError::EdgeProbability { p, block });
            }
        }
        Ok(())
    }
}

/// An undirected simple graph with a two-community node partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    v1: usize,
    v2: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Graph {
    /// Builds a graph from `(u, v)` pairs with `u < v`, validating that all
    /// endpoints are in range and no edge repeats.
    pub fn from_edges(v1: usize, v2: usize, edges: &[(u32, u32)]) -> Result<Self, SbmError> {
        let v = v1 + v2;
        let mut sorted = edges.to_vec();
        sorted.sort_unstable();
        for i in 0..sorted.len() {
            let (a, b) = sorted[i];
            if a >= b {
                return Err(SbmError::InvalidEdge {
                    u: a,
                    v: b,
                    reason: "endpoints must satisfy u < v",
                });
            }
            if (b as usize) >= v {
                return Err(SbmError::InvalidEdge {
                    u: a,
                    v: b,
                    reason: "endpoint out of range",
                });
            }
            if i > 0 && sorted[i - 1] == sorted[i] {
                return Err(SbmError::InvalidEdge {
                    u: a,
                    v: b,
                    reason: "duplicate edge",
                });
            }
        }
        let mut degree = vec![0usize; v];
        for &(a, b) in &sorted {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(v + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; 2 * sorted.len()];
        for &(a, b) in &sorted {
            neighbors[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
            neighbors[cursor[b as usize]] = a;
            cursor[b as usize] += 1;
        }
        for u in 0..v {
            neighbors[offsets[u]..offsets[u + 1]].sort_unstable();
        }
        Ok(Self {
            v1,
            v2,
            offsets,
            neighbors,
        })
    }

    pub fn node_count(&self) -> usize {
        self.v1 + self.v2
    }

    /// `(V1, V2)`.
    pub fn community_sizes(&self) -> (usize, usize) {
        (self.v1, self.v2)
    }

    /// Community of node `u`: 1 or 2.
    pub fn community(&self, u: usize) -> usize {
        if u < self.v1 {
            1
        } else {
            2
        }
    }

    /// Ground-truth spin of node `u`: `+1` in community 1, `-1` in 2.
    pub fn truth_spin(&self, u: usize) -> Spin {
        if u < self.v1 {
            1
        } else {
            -1
        }
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    /// Neighbors of `u` in ascending order.
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Iterates edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| (u as u32) < v)
                .map(move |&v| (u as u32, v))
        })
    }

    /// Endpoints `(owner, neighbor)` of directed arc slot `arc` in
    /// `[0, 2*edge_count)`. Each undirected edge occupies exactly two arcs,
    /// so a uniform arc pick is a uniform edge pick.
    pub fn arc_endpoints(&self, arc: usize) -> (u32, u32) {
        debug_assert!(arc < self.neighbors.len());
        let u = self.offsets.partition_point(|&off| off <= arc) - 1;
        (u as u32, self.neighbors[arc])
    }

    /// Structural FNV-1a digest; equal digests identify equal graphs in
    /// experiment metadata.
    pub fn digest(&self) -> u64 {
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        let mut eat = |x: u64| {
            for byte in x.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        };
        eat(self.v1 as u64);
        eat(self.v2 as u64);
        eat(self.neighbors.len() as u64);
        for &off in &self.offsets {
            eat(off as u64);
        }
        for &nb in &self.neighbors {
            eat(nb as u64);
        }
        h
    }

    /// Writes the plain-text format: first line `V V1 V2`, then one `u v`
    /// line per edge with `u < v`, ascending, 0-indexed.
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {} {}", self.node_count(), self.v1, self.v2)?;
        for (u, v) in self.edges() {
            writeln!(w, "{} {}", u, v)?;
        }
        Ok(())
    }

    pub fn to_file<P: AsRef<Path>>(&self, path: P) -> Result<(), SbmError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self, SbmError> {
        let mut lines = r.lines();
        let header = loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(SbmError::Malformed("missing header line".into())),
            }
        };
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| SbmError::Malformed(format!("bad header token `{t}`")))
            })
            .collect::<Result<_, _>>()?;
        let [v, v1, v2] = fields[..] else {
            return Err(SbmError::Malformed("header must read `V V1 V2`".into()));
        };
        if v != v1 + v2 {
            return Err(SbmError::Malformed(format!(
                "header inconsistent: {v} != {v1} + {v2}"
            )));
        }
        let mut edges = Vec::new();
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let mut it = t.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return Err(SbmError::Malformed(format!("bad edge line `{t}`")));
            };
            let a: u32 = a
                .parse()
                .map_err(|_| SbmError::Malformed(format!("bad endpoint `{a}`")))?;
            let b: u32 = b
                .parse()
                .map_err(|_| SbmError::Malformed(format!("bad endpoint `{b}`")))?;
            edges.push((a, b));
        }
        Self::from_edges(v1, v2, &edges)
    }

    pub fn from_file<P: AsRef<Path>>(path: P) -> Result<Self, SbmError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

/// Samples a block-model graph. Identical `(params, seed)` always produce an
/// identical graph; the draw consumes only the graph stream of `seed`.
pub fn sample_sbm(params: &SbmParams, seed: u64) -> Result<Graph, SbmError> {
    params.validate()?;
    let mut rng = stream_rng(seed, Stream::Graph);
    let v1 = params.v1;
    let v2 = params.v2;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    sample_block_pairs(v1, 0, params.intra_prob(), &mut rng, &mut edges);
    sample_block_pairs(v2, v1 as u32, params.intra_prob(), &mut rng, &mut edges);
    sample_cross_pairs(v1, v2, params.inter_prob(), &mut rng, &mut edges);
    Graph::from_edges(v1, v2, &edges)
}

/// Visits each candidate slot of a Bernoulli(p) sequence of length `total`
/// via geometric gap skipping, pushing the index of every success.
fn geometric_hits<R: Rng>(total: u64, p: f64, rng: &mut R, mut hit: impl FnMut(u64)) {
    if total == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for t in 0..total {
            hit(t);
        }
        return;
    }
    let ln_q = (1.0 - p).ln();
    let mut idx: u64 = 0;
    loop {
        // 1 - U lies in (0, 1], so the log is finite and the gap follows the
        // geometric law with success probability p.
        let u: f64 = rng.random();
        let gap = ((1.0 - u).ln() / ln_q).floor();
        idx = idx.saturating_add(gap as u64);
        if idx >= total {
            return;
        }
        hit(idx);
        idx += 1;
    }
}

/// Unordered pairs `(i < j)` within a block of `m` nodes starting at `offset`.
fn sample_block_pairs<R: Rng>(
    m: usize,
    offset: u32,
    p: f64,
    rng: &mut R,
    edges: &mut Vec<(u32, u32)>,
) {
    if m < 2 {
        return;
    }
    let m64 = m as u64;
    let total = m64 * (m64 - 1) / 2;
    geometric_hits(total, p, rng, |t| {
        let (i, j) = pair_from_index(t, m64);
        edges.push((offset + i as u32, offset + j as u32));
    });
}

/// Pairs `(i, v1 + j)` across the two blocks.
fn sample_cross_pairs<R: Rng>(
    v1: usize,
    v2: usize,
    p: f64,
    rng: &mut R,
    edges: &mut Vec<(u32, u32)>,
) {
    let total = v1 as u64 * v2 as u64;
    let w = v2 as u64;
    geometric_hits(total, p, rng, |t| {
        edges.push(((t / w) as u32, (v1 as u64 + t % w) as u32));
    });
}

/// Maps a lexicographic pair index `t` to the pair `(i, j)`, `i < j`, over
/// `m` nodes. Row `i` starts at index `i*(2m - i - 1)/2`; the float estimate
/// of the row is corrected by exact integer steps.
fn pair_from_index(t: u64, m: u64) -> (u64, u64) {
    let row_start = |i: u64| i * (2 * m - i - 1) / 2;
    let mf = m as f64;
    let disc = (2.0 * mf - 1.0) * (2.0 * mf - 1.0) - 8.0 * t as f64;
    let mut i = ((2.0 * mf - 1.0 - disc.max(0.0).sqrt()) / 2.0).max(0.0) as u64;
    i = i.min(m - 2);
    while i > 0 && row_start(i) > t {
        i -= 1;
    }
    while row_start(i + 1) <= t {
        i += 1;
    }
    (i, i + 1 + (t - row_start(i)))
}

/// An open interval `(lo, hi)` of admissible penalty strengths; infinite
/// endpoints mean unbounded. The interval may come out empty when computed
/// from inconsistent estimates; it is reported as-is, never clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaInterval {
    pub lo: f64,
    pub hi: f64,
}

impl AlphaInterval {
    pub fn all_reals() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    pub fn contains(&self, alpha: f64) -> bool {
        self.lo < alpha && alpha < self.hi
    }
}

/// The interval of penalty strengths for which the aligned configuration is
/// the unique attractor of the two-community drift:
/// `((b*vmax - a*vmin)/(vmax - vmin), (a*vmax - b*vmin)/(vmax - vmin))`,
/// all of the reals when the communities have equal size.
pub fn admissible_alpha_interval(
    a: f64,
    b: f64,
    v1: f64,
    v2: f64,
) -> Result<AlphaInterval, SbmError> {
    if !(a > b && b > 0.0) {
        return Err(SbmError::InvalidParams(format!(
            "need a > b > 0, got a = {a}, b = {b}"
        )));
    }
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(SbmError::InvalidParams(format!(
            "community fractions must be positive, got v1 = {v1}, v2 = {v2}"
        )));
    }
    Ok(alpha_interval_raw(a, b, v1, v2))
}

/// Interval formula without precondition checks; used on noisy estimates
/// where `a_hat <= b_hat` must surface as an empty interval.
pub(crate) fn alpha_interval_raw(a: f64, b: f64, v1: f64, v2: f64) -> AlphaInterval {
    let (big, small) = if v1 >= v2 { (v1, v2) } else { (v2, v1) };
    if big == small {
        return AlphaInterval::all_reals();
    }
    let d = big - small;
    AlphaInterval {
        lo: (b * big - a * small) / d,
        hi: (a * big - b * small) / d,
    }
}

/// Model quantities inferred from a revealed subset of labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatedParams {
    /// Estimated community sizes (revealed count / eta).
    pub v1_hat: f64,
    pub v2_hat: f64,
    /// Intra/inter rates on the same scale as `a` and `b`.
    pub a_hat: f64,
    pub b_hat: f64,
    /// Admissible penalty interval computed from the estimates.
    pub alpha_interval: AlphaInterval,
}

/// Estimates `(V1, V2, a, b)` from edge densities among revealed nodes.
///
/// `revealed` carries claimed labels; pairs of revealed nodes claiming the
/// same community estimate the intra density, mixed pairs the inter density.
/// Densities are rescaled by `n / lambda` so the estimates are directly
/// comparable with the model's `a` and `b`.
pub fn estimate_params(
    graph: &Graph,
    revealed: &RevealedLabels,
    eta: f64,
    n: usize,
    lambda: f64,
) -> Result<EstimatedParams, SbmError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(SbmError::InvalidParams(format!(
            "eta must lie in (0, 1], got {eta}"
        )));
    }
    if n == 0 || !(lambda > 0.0) {
        return Err(SbmError::InvalidParams(
            "scale n and lambda must be positive".into(),
        ));
    }
    let (m1, m2) = revealed.claim_counts();
    for (m, community) in [(m1, 1), (m2, 2)] {
        if m < 2 {
            return Err(SbmError::EstimationUndefined { community });
        }
    }
    let claims = revealed.spin_map(graph.node_count());
    let mut intra_edges = 0u64;
    let mut cross_edges = 0u64;
    for (u, su) in revealed.iter() {
        for &v in graph.neighbors(u as usize) {
            if v > u {
                let sv = claims[v as usize];
                if sv != 0 {
                    if sv == su {
                        intra_edges += 1;
                    } else {
                        cross_edges += 1;
                    }
                }
            }
        }
    }
    let pairs = |m: usize| (m as u64 * (m as u64 - 1) / 2) as f64;
    let intra_pairs = pairs(m1) + pairs(m2);
    let cross_pairs = m1 as f64 * m2 as f64;
    let scale = n as f64 / lambda;
    let a_hat = intra_edges as f64 / intra_pairs * scale;
    let b_hat = cross_edges as f64 / cross_pairs * scale;
    let v1_hat = m1 as f64 / eta;
    let v2_hat = m2 as f64 / eta;
    Ok(EstimatedParams {
        v1_hat,
        v2_hat,
        a_hat,
        b_hat,
        alpha_interval: alpha_interval_raw(a_hat, b_hat, v1_hat, v2_hat),
    })
}
