//! Command-line driver: graph generation, single runs of the recovery
//! dynamics, limit-curve tools, baseline detectors, brute-force verification
//! on small graphs, and the shipped experiment presets.

// Validation guards are written `!(x > 0.0)` on purpose: the negation must
// reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use spinclust::baselines::{BaselineKind, BaselineSpec};
use spinclust::glauber::{
    classification_error, reveal_labels, run, seed_spins_from, Mode, OracleNoise, SimParams,
};
use spinclust::harness::{
    self, all_pass, CheckResult, Fig1Config, HorizonRule, LambdaSpec, RecoveryConfig, SweepConfig,
    TableConfig, TableRun,
};
use spinclust::ising::IsingParams;
use spinclust::meanfield::{direction_field, square_grid, DriftParams, MeanFieldCurve};
use spinclust::oracle;
use spinclust::sbm::{sample_sbm, Graph, SbmParams};

/// Semi-supervised two-community detection on sparse stochastic block
/// models: Glauber dynamics for a magnetization-penalised Ising model, its
/// limit-curve tools, baseline detectors, and the benchmark presets.
#[derive(Parser)]
#[command(name = "spinclust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a two-community graph and write it to a file.
    Gen(GenArgs),
    /// Run the recovery dynamics once; report the trajectory and errors.
    Run(RunArgs),
    /// Tabulate the limit magnetization curve on a time grid.
    Meanfield(MeanfieldArgs),
    /// Tabulate the drift sign field of the limit ODE over [-1, 1]^2.
    Field(FieldArgs),
    /// Run one baseline detector on a graph.
    Baseline(BaselineArgs),
    /// Check the dynamics against brute-force references on small graphs.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Averaged magnetization trajectories against the limit curve.
    Fig1(Fig1Args),
    /// Benchmark table: the dynamics alone on uneven communities.
    Table1(TableArgs),
    /// Benchmark table: the dynamics against the baseline lineup.
    Table2(TableArgs),
    /// Recovery quality at a size-dependent horizon, across sizes.
    Recovery(RecoveryArgs),
    /// Free-form dynamics sweep driven by a JSON config.
    Sweep(SweepArgs),
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Meanfield(args) => cmd_meanfield(args),
        Command::Field(args) => cmd_field(args),
        Command::Baseline(args) => cmd_baseline(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Fig1(args) => cmd_fig1(args),
        Command::Table1(args) => cmd_table(1, args),
        Command::Table2(args) => cmd_table(2, args),
        Command::Recovery(args) => cmd_recovery(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

// ---------------------------------------------------------------------------
// Shared parsing and output plumbing
// ---------------------------------------------------------------------------

fn parse_beta(text: &str) -> Result<f64, String> {
    if text.eq_ignore_ascii_case("inf") || text.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    text.parse()
        .map_err(|_| format!("bad inverse temperature {text:?} (number or `inf`)"))
}

fn parse_lambda(text: &str) -> Result<LambdaSpec, String> {
    LambdaSpec::parse(text).map_err(|e| e.to_string())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| anyhow!("bad {what} entry {p:?}"))
        })
        .collect()
}

/// Loads a graph from a file path, or samples one from an inline
/// `gen:v1=..,a=..,b=..[,v2=..,n=..,lambda=..,seed=..]` spec.
fn load_graph(spec: &str) -> Result<Graph> {
    let Some(body) = spec.strip_prefix("gen:") else {
        return Graph::from_file(spec).with_context(|| format!("reading graph {spec:?}"));
    };
    let (mut v1, mut v2, mut n) = (None, None, None);
    let (mut a, mut b) = (None, None);
    let mut lambda = LambdaSpec::LOG_N;
    let mut seed = 0u64;
    for pair in body.split(',').filter(|p| !p.is_empty()) {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| anyhow!("bad gen entry {pair:?} (want key=value)"))?;
        match key {
            "v1" => v1 = Some(value.parse()?),
            "v2" => v2 = Some(value.parse()?),
            "n" => n = Some(value.parse()?),
            "a" => a = Some(value.parse()?),
            "b" => b = Some(value.parse()?),
            "lambda" => lambda = LambdaSpec::parse(value)?,
            "seed" => seed = value.parse()?,
            _ => bail!("unknown gen key {key:?}"),
        }
    }
    let v1: usize = v1.ok_or_else(|| anyhow!("gen spec needs v1"))?;
    let n: usize = n.unwrap_or(v1);
    let params = SbmParams {
        v1,
        v2: v2.unwrap_or(v1),
        n,
        a: a.ok_or_else(|| anyhow!("gen spec needs a"))?,
        b: b.ok_or_else(|| anyhow!("gen spec needs b"))?,
        lambda: lambda.resolve(n),
    };
    Ok(sample_sbm(&params, seed)?)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn write_meta(path: Option<&PathBuf>, value: serde_json::Value) -> Result<()> {
    if let Some(path) = path {
        fs::write(path, format!("{value:#}\n"))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// JSON value for a float that may be non-finite (JSON numbers cannot be).
fn num_or_str(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn report_checks(checks: &[CheckResult]) -> ExitCode {
    for c in checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {} ({})", c.name, c.detail);
    }
    if all_pass(checks) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn table_meta(which: u8, run: &TableRun, cfg: &TableConfig, elapsed_s: f64) -> serde_json::Value {
    json!({
        "table": which,
        "config": cfg,
        "nodes": run.nodes,
        "graph_digests": run.graph_digests,
        "runtime_ms_per_row": run.runtime_ms,
        "elapsed_s": elapsed_s,
    })
}

// ---------------------------------------------------------------------------
// gen / run
// ---------------------------------------------------------------------------

#[derive(Args)]
struct GenArgs {
    /// Size of community 1.
    #[arg(long)]
    v1: usize,
    /// Size of community 2.
    #[arg(long)]
    v2: usize,
    /// Density scale in the edge probabilities a*lambda/n and b*lambda/n
    /// (defaults to v1).
    #[arg(long)]
    n: Option<usize>,
    /// Intra-community rate.
    #[arg(long)]
    a: f64,
    /// Inter-community rate.
    #[arg(long)]
    b: f64,
    /// Sparsity factor: a number, `log-n`, or `<f>*log-n`.
    #[arg(long, default_value = "log-n", value_parser = parse_lambda)]
    lambda: LambdaSpec,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output graph file.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let n = args.n.unwrap_or(args.v1);
    let params = SbmParams {
        v1: args.v1,
        v2: args.v2,
        n,
        a: args.a,
        b: args.b,
        lambda: args.lambda.resolve(n),
    };
    let graph = sample_sbm(&params, args.seed)?;
    graph.to_file(&args.out)?;
    println!(
        "wrote {} nodes, {} edges to {} (digest {:016x})",
        graph.node_count(),
        graph.edge_count(),
        args.out.display(),
        graph.digest()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Continuous time (uniformized chain over [0, t-end]).
    Ct,
    /// Discrete proposal slots (t-end slots).
    Dt,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ct => Mode::Continuous,
            ModeArg::Dt => Mode::Discrete,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Graph file, or inline `gen:v1=..,a=..,b=..[,v2=..,n=..,lambda=..,seed=..]`.
    #[arg(long)]
    graph: String,
    /// Fraction of labels revealed to the dynamics.
    #[arg(long)]
    eta: f64,
    /// Penalty strength; the per-pair penalty is alpha*lambda/n.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Sparsity factor used to scale the penalty.
    #[arg(long, default_value = "log-n", value_parser = parse_lambda)]
    lambda: LambdaSpec,
    /// Density scale used for the penalty; defaults to the size of the
    /// graph's first community.
    #[arg(long)]
    n: Option<usize>,
    /// Per-pair penalty, bypassing the alpha*lambda/n scaling.
    #[arg(long, conflicts_with_all = ["alpha", "lambda", "n"])]
    alpha_n: Option<f64>,
    /// Inverse temperature (number or `inf`).
    #[arg(long, default_value = "inf", value_parser = parse_beta)]
    beta: f64,
    /// Time horizon (ct) or proposal slots (dt).
    #[arg(long, default_value_t = 5.0)]
    t_end: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Ct)]
    mode: ModeArg,
    /// Comma-separated observation times (ct) or slot counts (dt).
    #[arg(long)]
    samples: Option<String>,
    /// Cap on proposals.
    #[arg(long)]
    max_proposals: Option<u64>,
    /// Cap on accepted flips.
    #[arg(long)]
    max_flips: Option<u64>,
    /// Forbid flips of revealed spins.
    #[arg(long)]
    pin_revealed: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let graph = load_graph(&args.graph)?;
    let (v1, _) = graph.community_sizes();
    let ising = match args.alpha_n {
        Some(alpha_n) => IsingParams::from_alpha_n(alpha_n, args.beta)?,
        None => {
            let n = args.n.unwrap_or(v1);
            IsingParams::from_model(args.alpha, args.lambda.resolve(n), n, args.beta)?
        }
    };
    let revealed = reveal_labels(&graph, args.eta, OracleNoise::none(), args.seed);
    let state = seed_spins_from(&graph, &revealed, args.seed, args.pin_revealed);
    let mut sim = SimParams::new(ising, args.mode.into(), args.t_end, args.seed);
    if let Some(samples) = &args.samples {
        sim.sample_times = parse_list(samples, "sample time")?;
    }
    sim.max_proposals = args.max_proposals;
    sim.max_flips = args.max_flips;
    sim.pin_revealed = args.pin_revealed;
    let traj = run(&graph, state, &sim);
    let err = classification_error(&graph, &traj.final_spins);
    let result = json!({
        "params": {
            "eta": args.eta,
            "alpha": ising.alpha,
            "alpha_n": ising.alpha_n,
            "beta": num_or_str(ising.beta),
            "mode": match sim.mode { Mode::Continuous => "ct", Mode::Discrete => "dt" },
            "t_end": num_or_str(sim.t_end),
            "pin_revealed": sim.pin_revealed,
            "seed": args.seed,
            "revealed": revealed.len(),
            "nodes": graph.node_count(),
            "edges": graph.edge_count(),
        },
        "trajectory": {
            "times": traj.times,
            "z1": traj.z1,
            "z2": traj.z2,
        },
        "proposed_updates": traj.proposed_updates,
        "accepted_flips": traj.accepted_flips,
        "frozen_at": traj.frozen_at,
        "stop": traj.stop,
        "error": {
            "err1": err.err1,
            "err2": err.err2,
            "err_total": err.err_total,
            "max_dev": err.max_dev,
        },
    });
    emit(&format!("{result:#}\n"), args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// meanfield / field
// ---------------------------------------------------------------------------

#[derive(Args)]
struct MeanfieldArgs {
    /// Fraction of revealed labels.
    #[arg(long)]
    eta: f64,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    /// CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_meanfield(args: MeanfieldArgs) -> Result<ExitCode> {
    if !(args.dt > 0.0) || !(args.t_max >= 0.0) {
        bail!("bad time grid");
    }
    let curve = MeanFieldCurve::new(args.eta)?;
    let steps = (args.t_max / args.dt + 1e-9).floor() as usize;
    let mut csv = String::from("t,z1,z2\n");
    for k in 0..=steps {
        let t = k as f64 * args.dt;
        let (z1, z2) = curve.value(t);
        csv.push_str(&format!("{t:.4},{z1:.6},{z2:.6}\n"));
    }
    emit(&csv, args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
struct FieldArgs {
    /// Intra-community rate.
    #[arg(long)]
    a: f64,
    /// Inter-community rate.
    #[arg(long)]
    b: f64,
    /// Penalty strength.
    #[arg(long)]
    alpha: f64,
    /// Relative weight of community 1.
    #[arg(long, default_value_t = 1.0)]
    v1: f64,
    /// Relative weight of community 2.
    #[arg(long, default_value_t = 1.0)]
    v2: f64,
    /// Grid points per axis over [-1, 1].
    #[arg(long, default_value_t = 21)]
    grid: usize,
    /// CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_field(args: FieldArgs) -> Result<ExitCode> {
    let params = DriftParams::new(args.a, args.b, args.alpha, args.v1, args.v2)?;
    let field = direction_field(&square_grid(args.grid), &params);
    let fmt_slope = |s: Option<f64>| {
        s.map(|x| format!("{x:.4}"))
            .unwrap_or_else(|| "vertical".into())
    };
    eprintln!(
        "regime: {}; zero-line slopes: {} (community 1), {} (community 2)",
        field.regime,
        fmt_slope(field.slope_line1),
        fmt_slope(field.slope_line2)
    );
    let mut csv = String::from("z1,z2,sign1,sign2\n");
    for p in &field.points {
        csv.push_str(&format!(
            "{:.4},{:.4},{},{}\n",
            p.z1, p.z2, p.sign1, p.sign2
        ));
    }
    emit(&csv, args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// baseline
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    ConsensusAsync,
    ConsensusSync,
    Gossip,
    Laplacian,
    Poisson,
}

impl From<KindArg> for BaselineKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::ConsensusAsync => BaselineKind::ConsensusAsync,
            KindArg::ConsensusSync => BaselineKind::ConsensusSync,
            KindArg::Gossip => BaselineKind::Gossip,
            KindArg::Laplacian => BaselineKind::Laplacian,
            KindArg::Poisson => BaselineKind::Poisson,
        }
    }
}

#[derive(Args)]
struct BaselineArgs {
    /// Graph file or inline `gen:` spec.
    #[arg(long)]
    graph: String,
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Fraction of labels revealed to the detector.
    #[arg(long)]
    eta: f64,
    /// Single-node updates (consensus-async), edge picks (gossip), or
    /// sweeps (the rest).
    #[arg(long)]
    iters: u64,
    /// Damping factor of the Laplacian methods.
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    /// Degree exponent of the Laplacian methods: 1 standard, 0.5
    /// normalised, 0 PageRank-style.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_baseline(args: BaselineArgs) -> Result<ExitCode> {
    let graph = load_graph(&args.graph)?;
    let revealed = reveal_labels(&graph, args.eta, OracleNoise::none(), args.seed);
    let spec = BaselineSpec {
        kind: args.kind.into(),
        iters: args.iters,
        gamma: args.gamma,
        delta_exp: args.delta,
        seed: args.seed,
    };
    let labels = spec.run(&graph, &revealed)?;
    let err = classification_error(&graph, &labels);
    let undecided = labels.iter().filter(|&&s| s == 0).count();
    let result = json!({
        "params": {
            "kind": spec.kind,
            "iters": spec.iters,
            "gamma": spec.gamma,
            "delta_exp": spec.delta_exp,
            "eta": args.eta,
            "seed": args.seed,
            "revealed": revealed.len(),
            "nodes": graph.node_count(),
            "edges": graph.edge_count(),
        },
        "undecided": undecided,
        "error": {
            "err1": err.err1,
            "err2": err.err2,
            "err_total": err.err_total,
            "max_dev": err.max_dev,
        },
    });
    emit(&format!("{result:#}\n"), args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
enum VerifyCommand {
    /// Exact Gibbs law sanity: normalisation and global-flip symmetry.
    Gibbs(VerifyGibbsArgs),
    /// Detailed-balance residual of the flip rates under the exact law.
    Balance(VerifyBalanceArgs),
    /// Total-variation gap between well-spaced dynamics samples and the
    /// exact law.
    Stationarity(VerifyStationarityArgs),
}

#[derive(Args)]
struct VerifyGibbsArgs {
    /// Graph file or inline `gen:` spec (at most 20 nodes).
    #[arg(long)]
    graph: String,
    /// Per-pair penalty.
    #[arg(long, default_value_t = 0.0)]
    alpha_n: f64,
    /// Finite inverse temperature.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct VerifyBalanceArgs {
    /// Graph file or inline `gen:` spec (at most 12 nodes).
    #[arg(long)]
    graph: String,
    #[arg(long, default_value_t = 0.0)]
    alpha_n: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct VerifyStationarityArgs {
    /// Graph file or inline `gen:` spec (at most 10 nodes).
    #[arg(long)]
    graph: String,
    #[arg(long, default_value_t = 0.0)]
    alpha_n: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Burn-in time before the first sample.
    #[arg(long, default_value_t = 3.0)]
    burn: f64,
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.03)]
    tol: f64,
}

fn verdict_line(name: &str, measured: f64, tol: f64) -> (bool, String) {
    let pass = measured <= tol;
    let verdict = if pass { "PASS" } else { "FAIL" };
    (
        pass,
        format!("{verdict} {name}: measured {measured:.3e}, tolerance {tol:.3e}"),
    )
}

fn cmd_verify(cmd: VerifyCommand) -> Result<ExitCode> {
    match cmd {
        VerifyCommand::Gibbs(args) => {
            let graph = load_graph(&args.graph)?;
            let dist = oracle::brute_force_gibbs(&graph, args.alpha_n, args.beta)?;
            let norm_gap = (dist.probabilities().iter().sum::<f64>() - 1.0).abs();
            let full_mask = dist.len() - 1;
            let flip_gap = (0..dist.len())
                .map(|c| (dist.log_probability(c) - dist.log_probability(c ^ full_mask)).abs())
                .fold(0.0f64, f64::max);
            let (p1, line1) = verdict_line("normalisation gap", norm_gap, 1e-12);
            let (p2, line2) = verdict_line("global-flip symmetry gap", flip_gap, args.tol);
            println!("{line1}\n{line2}");
            Ok(if p1 && p2 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        VerifyCommand::Balance(args) => {
            let graph = load_graph(&args.graph)?;
            let residual = oracle::detailed_balance_residual(&graph, args.alpha_n, args.beta)?;
            let (pass, line) = verdict_line("detailed-balance residual", residual, args.tol);
            println!("{line}");
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        VerifyCommand::Stationarity(args) => {
            let graph = load_graph(&args.graph)?;
            let tv = oracle::stationarity_check(
                &graph,
                args.alpha_n,
                args.beta,
                args.burn,
                args.samples,
                args.seed,
            )?;
            let (pass, line) = verdict_line("stationary total-variation gap", tv, args.tol);
            println!("{line}");
            Ok(if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Experiment presets
// ---------------------------------------------------------------------------

#[derive(Args)]
struct Fig1Args {
    /// Scale on the community size (1.0 = the shipped figure).
    #[arg(long, default_value_t = 1.0)]
    n_scale: f64,
    #[arg(long, default_value_t = 20)]
    replicates: usize,
    /// Comma-separated sparsity specs.
    #[arg(long, default_value = "log-n,3*log-n")]
    lambdas: String,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Curve CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metadata JSON path.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Check the regression windows; the exit code reports them.
    #[arg(long)]
    check: bool,
}

fn scaled(base: usize, scale: f64) -> usize {
    ((base as f64 * scale).round() as usize).max(2)
}

fn cmd_fig1(args: Fig1Args) -> Result<ExitCode> {
    let mut cfg = Fig1Config::full_scale(args.seed);
    cfg.community_size = scaled(cfg.community_size, args.n_scale);
    cfg.replicates = args.replicates;
    cfg.t_max = args.t_max;
    cfg.dt = args.dt;
    cfg.eta = args.eta;
    cfg.workers = args.workers;
    cfg.lambdas = args
        .lambdas
        .split(',')
        .map(|s| LambdaSpec::parse(s).map_err(anyhow::Error::from))
        .collect::<Result<_>>()?;

    let t0 = Instant::now();
    let curves = harness::run_fig1(&cfg)?;
    emit(&harness::fig1_csv(&curves), args.out.as_ref())?;
    write_meta(
        args.meta.as_ref(),
        json!({
            "config": cfg,
            "curves": curves.iter().map(|c| json!({
                "scale": c.scale,
                "lambda": c.lambda,
                "mean_sup_dev": c.mean_sup_dev,
                "sup_devs": c.sup_devs,
                "mean_runtime_ms": c.mean_runtime_ms,
            })).collect::<Vec<_>>(),
            "elapsed_s": t0.elapsed().as_secs_f64(),
        }),
    )?;
    if args.check {
        return Ok(report_checks(&harness::check_fig1(&curves, 0.08)));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
struct TableArgs {
    /// Scale on the community sizes (1.0 = the shipped table).
    #[arg(long, default_value_t = 1.0)]
    n_scale: f64,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Table CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metadata JSON path.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Check the regression windows; the exit code reports them.
    #[arg(long)]
    check: bool,
}

fn cmd_table(which: u8, args: TableArgs) -> Result<ExitCode> {
    let cfg = TableConfig {
        replicates: args.replicates,
        seed: args.seed,
        workers: args.workers,
        size_scale: args.n_scale,
    };
    let t0 = Instant::now();
    let run = if which == 1 {
        harness::run_table1(&cfg)?
    } else {
        harness::run_table2(&cfg)?
    };
    emit(&harness::rows_csv(&run.rows), args.out.as_ref())?;
    write_meta(
        args.meta.as_ref(),
        table_meta(which, &run, &cfg, t0.elapsed().as_secs_f64()),
    )?;
    if args.check {
        let checks = if which == 1 {
            harness::check_table1(&run.rows)
        } else {
            harness::check_table2(&run.rows, run.nodes)
        };
        return Ok(report_checks(&checks));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
struct RecoveryArgs {
    /// Comma-separated community sizes, ascending.
    #[arg(long, default_value = "2000,8000,32000")]
    sizes: String,
    /// Horizon factor: t = c * ln(lambda).
    #[arg(long, default_value_t = 0.2)]
    c: f64,
    /// Fixed-error horizon t = ln(2(1-eta)/eps); replaces the --c rule.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Inverse temperature (number or `inf`).
    #[arg(long, default_value = "inf", value_parser = parse_beta)]
    beta: f64,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Trend CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metadata JSON path.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Check the regression windows; the exit code reports them.
    #[arg(long)]
    check: bool,
}

fn cmd_recovery(args: RecoveryArgs) -> Result<ExitCode> {
    let horizon = match args.eps {
        Some(eps) => HorizonRule::ErrorTarget { eps },
        None => HorizonRule::LogLambda { c: args.c },
    };
    let cfg = RecoveryConfig {
        community_sizes: parse_list(&args.sizes, "community size")?,
        a: args.a,
        b: args.b,
        eta: args.eta,
        alpha: args.alpha,
        beta: args.beta,
        lambda: LambdaSpec::LOG_N,
        horizon,
        replicates: args.replicates,
        seed: args.seed,
        workers: args.workers,
    };
    let t0 = Instant::now();
    let rows = harness::run_recovery(&cfg)?;
    emit(&harness::recovery_csv(&rows), args.out.as_ref())?;
    write_meta(
        args.meta.as_ref(),
        json!({
            "config": cfg,
            "rows": rows,
            "elapsed_s": t0.elapsed().as_secs_f64(),
        }),
    )?;
    if args.check {
        let checks = match horizon {
            HorizonRule::LogLambda { .. } => harness::check_recovery_trend(&rows),
            HorizonRule::ErrorTarget { eps } => {
                let min_passing = (0.8 * cfg.replicates as f64).ceil() as usize;
                harness::check_recovery_horizon(&rows, eps + 0.02, min_passing)
            }
        };
        return Ok(report_checks(&checks));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file with the sweep config.
    #[arg(long)]
    config: PathBuf,
    /// Table CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metadata JSON path.
    #[arg(long)]
    meta: Option<PathBuf>,
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let cfg: SweepConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;
    let t0 = Instant::now();
    let run = harness::run_sweep(&cfg)?;
    emit(&harness::rows_csv(&run.rows), args.out.as_ref())?;
    write_meta(
        args.meta.as_ref(),
        json!({
            "config": cfg,
            "nodes": run.nodes,
            "graph_digests": run.graph_digests,
            "runtime_ms_per_row": run.runtime_ms,
            "elapsed_s": t0.elapsed().as_secs_f64(),
        }),
    )?;
    Ok(ExitCode::SUCCESS)
}
