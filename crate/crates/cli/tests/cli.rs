//! End-to-end smoke tests of the command-line interface.

use std::process::{Command, Output};

fn spinclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinclust"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generates_graphs_and_runs_the_dynamics_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let graph = graph.to_str().unwrap();
    let gen = spinclust(&[
        "gen", "--v1", "120", "--v2", "80", "--a", "6", "--b", "1", "--seed", "4", "--out", graph,
    ]);
    assert!(gen.status.success(), "{gen:?}");
    assert!(stdout(&gen).contains("200 nodes"));

    let args = [
        "run", "--graph", graph, "--eta", "0.1", "--alpha", "4", "--t-end", "3", "--seed", "2",
    ];
    let one = spinclust(&args);
    let two = spinclust(&args);
    assert!(one.status.success(), "{one:?}");
    assert_eq!(one.stdout, two.stdout);

    let report: serde_json::Value = serde_json::from_str(&stdout(&one)).unwrap();
    assert_eq!(report["params"]["nodes"], 200);
    assert_eq!(report["params"]["beta"], "inf");
    let err = report["error"]["err_total"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&err));
}

#[test]
fn limit_curve_tabulates_the_closed_form() {
    let out = spinclust(&["meanfield", "--eta", "0.1", "--t-max", "1", "--dt", "0.5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    assert_eq!(
        lines,
        vec![
            "t,z1,z2",
            "0.0000,0.100000,-0.100000",
            "0.5000,0.454122,-0.454122",
            "1.0000,0.668909,-0.668909",
        ]
    );
}

#[test]
fn drift_field_reports_grid_and_regime() {
    let out = spinclust(&[
        "field", "--a", "7", "--b", "1", "--alpha", "6", "--grid", "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("z1,z2,sign1,sign2\n"));
    assert_eq!(text.lines().count(), 1 + 4);
    let log = String::from_utf8(out.stderr).unwrap();
    assert!(log.contains("regime:"), "{log}");
}

#[test]
fn baselines_run_from_inline_graph_specs() {
    let out = spinclust(&[
        "baseline",
        "--graph",
        "gen:v1=100,a=5,b=1,seed=3",
        "--kind",
        "consensus-sync",
        "--eta",
        "0.2",
        "--iters",
        "10",
    ]);
    assert!(out.status.success(), "{out:?}");
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["params"]["kind"], "ConsensusSync");
    assert!(report["error"]["err_total"].as_f64().unwrap() <= 0.5);
}

#[test]
fn verification_exit_codes_follow_the_tolerance() {
    let graph = "gen:v1=3,v2=2,a=2,b=1,n=5,lambda=1,seed=1";
    let pass = spinclust(&["verify", "balance", "--graph", graph, "--beta", "1"]);
    assert!(pass.status.success(), "{pass:?}");
    assert!(stdout(&pass).starts_with("PASS"));

    let fail = spinclust(&[
        "verify", "balance", "--graph", graph, "--beta", "1", "--tol", "1e-20",
    ]);
    assert_eq!(fail.status.code(), Some(1));
    assert!(stdout(&fail).starts_with("FAIL"));
}

#[test]
fn figure_csv_is_byte_reproducible() {
    let args = [
        "fig1",
        "--n-scale",
        "0.02",
        "--replicates",
        "2",
        "--t-max",
        "1",
        "--dt",
        "0.5",
        "--seed",
        "3",
    ];
    let one = spinclust(&args);
    let two = spinclust(&args);
    assert!(one.status.success(), "{one:?}");
    assert_eq!(one.stdout, two.stdout);
    let text = stdout(&one);
    assert!(text.starts_with("scale,lambda,t,"));
    // header + two sparsity scales x three grid points
    assert_eq!(text.lines().count(), 1 + 2 * 3);
}

#[test]
fn tables_write_csv_and_meta_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t2.csv");
    let meta = dir.path().join("t2.json");
    let out = spinclust(&[
        "table2",
        "--n-scale",
        "0.02",
        "--replicates",
        "2",
        "--seed",
        "7",
        "--out",
        csv.to_str().unwrap(),
        "--meta",
        meta.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("table,algorithm,a,b,alpha,beta,eta,mu,sigma"));
    assert_eq!(table.lines().count(), 1 + 8 * 10);

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&meta).unwrap()).unwrap();
    assert_eq!(meta["nodes"], 200);
    assert_eq!(meta["graph_digests"].as_array().unwrap().len(), 2);
    assert_eq!(meta["runtime_ms_per_row"].as_array().unwrap().len(), 80);
}

#[test]
fn sweep_runs_from_a_json_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    std::fs::write(
        &config,
        r#"{
            "label": "mini", "v1": 80, "v2": 80, "n": 80,
            "a": 6.0, "b": 1.0, "lambda": "log-n",
            "alphas": [0.0, 4.0], "betas": ["inf"], "etas": [0.1],
            "replicates": 2, "flip_cap": null, "proposals_per_node": 15.0,
            "pin_revealed": false, "mode": "Continuous", "seed": 3, "workers": 0
        }"#,
    )
    .unwrap();
    let out = spinclust(&["sweep", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("mini,glauber,6,1,0,inf,0.1,"));
    assert!(text.contains("mini,glauber,6,1,4,inf,0.1,"));
}

#[test]
fn recovery_trend_check_sets_the_exit_code() {
    let out = spinclust(&[
        "recovery",
        "--sizes",
        "100,400",
        "--replicates",
        "3",
        "--seed",
        "5",
        "--check",
    ]);
    let text = stdout(&out);
    assert!(text.starts_with("community_size,lambda,t_end,"), "{text}");
    assert!(text.contains("PASS recovery") || text.contains("FAIL recovery"));
    match out.status.code() {
        Some(0) => assert!(text.contains("PASS recovery")),
        Some(1) => assert!(text.contains("FAIL recovery")),
        code => panic!("unexpected exit {code:?}"),
    }
}
