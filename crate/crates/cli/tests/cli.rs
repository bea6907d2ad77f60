//! End-to-end tests for the `causal` binary: exit codes, output formats, and
//! determinism, driven through real process invocations on temp files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn causal(args: &[&str]) -> Output {
    causal_with_env(args, &[])
}

fn causal_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_causal"));
    cmd.args(args);
    for (key, value) in env {
        cmd.env(key, value);
    }
    cmd.output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf8 stderr")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

/// A five-node graph with one backdoor path (X <- Z -> Y) and one collider
/// (X -> K <- Y), written to `dir`.
fn write_test_dag(dir: &Path) -> PathBuf {
    let path = dir.join("dag.json");
    std::fs::write(
        &path,
        r#"{
  "nodes": [
    {"id": "X", "role": "Treatment"},
    {"id": "Y", "role": "Outcome"},
    {"id": "Z", "role": "ObservedConfounder"},
    {"id": "K"},
    {"id": "M"}
  ],
  "edges": [["Z", "X"], ["Z", "Y"], ["X", "M"], ["M", "Y"], ["X", "K"], ["Y", "K"]]
}"#,
    )
    .expect("dag written");
    path
}

/// Export a built-in scenario's structural model to `dir`.
fn export_model(dir: &Path, id: &str) -> PathBuf {
    let path = dir.join(format!("{id}.json"));
    let output = causal(&["catalog", "--export", id]);
    assert_eq!(code(&output), 0, "export failed: {}", stderr(&output));
    std::fs::write(&path, output.stdout.as_slice()).expect("model written");
    path
}

/// Simulate a dataset from a model file into `dir`.
fn simulate_csv(dir: &Path, model: &Path, n: &str, seed: &str) -> PathBuf {
    let path = dir.join(format!("sim-{n}-{seed}.csv"));
    let output = causal(&[
        "simulate",
        model.to_str().unwrap(),
        "--n",
        n,
        "--seed",
        seed,
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0, "simulate failed: {}", stderr(&output));
    path
}

// ── Graph queries ────────────────────────────────────────────────────────────

#[test]
fn dsep_reports_separation_and_connection_with_matching_exit_codes() {
    let dir = TempDir::new().unwrap();
    let dag = write_test_dag(dir.path());
    let dag = dag.to_str().unwrap();

    // Conditioning on Z and M blocks both the backdoor and the front-door
    // chain, and the collider K stays closed.
    let separated = causal(&["dsep", dag, "X", "Y", "--given", "Z,M"]);
    assert_eq!(code(&separated), 0, "{}", stderr(&separated));
    assert_eq!(stdout(&separated).trim(), "d-separated");

    // Marginally X and Y are connected; verbose mode lists the open paths.
    let connected = causal(&["dsep", dag, "X", "Y", "--verbose"]);
    assert_eq!(code(&connected), 1);
    let text = stdout(&connected);
    assert!(text.starts_with("d-connected"), "unexpected output: {text}");
    assert!(text.contains("X <- Z -> Y"), "missing backdoor path: {text}");
    assert!(text.contains("X -> M -> Y"), "missing chain path: {text}");
    assert!(!text.contains("K"), "collider path should be closed: {text}");

    // Conditioning on the collider opens it back up.
    let collider = causal(&["dsep", dag, "X", "Y", "--given", "Z,M,K"]);
    assert_eq!(code(&collider), 1);

    let missing = causal(&["dsep", "/nonexistent/dag.json", "X", "Y"]);
    assert_eq!(code(&missing), 2);

    let unknown_node = causal(&["dsep", dag, "X", "Q"]);
    assert_eq!(code(&unknown_node), 2);
}

#[test]
fn paths_marks_openness_and_backdoor_status() {
    let dir = TempDir::new().unwrap();
    let dag = write_test_dag(dir.path());
    let dag = dag.to_str().unwrap();

    let all = causal(&["paths", dag, "X", "Y"]);
    assert_eq!(code(&all), 0);
    let text = stdout(&all);
    assert!(text.contains("X <- Z -> Y  [open, backdoor]"), "{text}");
    assert!(text.contains("X -> M -> Y  [open]"), "{text}");
    assert!(text.contains("X -> K <- Y  [blocked]"), "{text}");

    let backdoor = causal(&["paths", dag, "X", "Y", "--backdoor-only", "--given", "Z"]);
    assert_eq!(code(&backdoor), 0);
    let text = stdout(&backdoor);
    assert_eq!(text.trim(), "X <- Z -> Y  [blocked, backdoor]");
}

#[test]
fn adjust_check_grades_candidate_sets() {
    let dir = TempDir::new().unwrap();
    let dag = write_test_dag(dir.path());
    let dag = dag.to_str().unwrap();

    let valid = causal(&["adjust-check", dag, "X", "Y", "--set", "Z"]);
    assert_eq!(code(&valid), 0, "{}", stderr(&valid));
    assert_eq!(stdout(&valid).trim(), "valid adjustment set");

    // The empty set leaves the backdoor open; verbose mode names it.
    let invalid = causal(&["adjust-check", dag, "X", "Y", "--verbose"]);
    assert_eq!(code(&invalid), 1);
    let text = stdout(&invalid);
    assert!(text.starts_with("invalid adjustment set"), "{text}");
    assert!(text.contains("X <- Z -> Y"), "{text}");

    // Conditioning on the collider K opens a new biasing path, so {Z, K}
    // fails even though {Z} alone succeeds.
    let collider = causal(&["adjust-check", dag, "X", "Y", "--set", "Z,K"]);
    assert_eq!(code(&collider), 1);
}

#[test]
fn intervene_cuts_dag_edges_and_fixes_model_equations() {
    let dir = TempDir::new().unwrap();
    let dag = write_test_dag(dir.path());

    // Graph surgery: do(X) removes Z -> X and nothing else into X.
    let cut = causal(&["intervene", dag.to_str().unwrap(), "--set", "X"]);
    assert_eq!(code(&cut), 0, "{}", stderr(&cut));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&cut)).expect("json dag");
    let edges: Vec<(String, String)> = parsed["edges"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (e[0].as_str().unwrap().to_string(), e[1].as_str().unwrap().to_string())
        })
        .collect();
    assert!(!edges.contains(&("Z".to_string(), "X".to_string())), "{edges:?}");
    assert!(edges.contains(&("Z".to_string(), "Y".to_string())), "{edges:?}");
    assert!(edges.contains(&("X".to_string(), "M".to_string())), "{edges:?}");

    // Model surgery: do(X = 1) replaces the equation with a constant.
    let model = export_model(dir.path(), "single-posttest");
    let fixed = causal(&["intervene", model.to_str().unwrap(), "--set", "X=1"]);
    assert_eq!(code(&fixed), 0, "{}", stderr(&fixed));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&fixed)).expect("json model");
    assert_eq!(parsed["equations"]["X"]["kind"], "constant");
    assert_eq!(parsed["equations"]["X"]["value"], 1.0);

    // A model intervention without a value is a usage error.
    let bare = causal(&["intervene", model.to_str().unwrap(), "--set", "X"]);
    assert_eq!(code(&bare), 2);
}

// ── Simulation ───────────────────────────────────────────────────────────────

#[test]
fn simulate_writes_deterministic_csv_with_node_order_header() {
    let dir = TempDir::new().unwrap();
    let model = export_model(dir.path(), "single-posttest");
    let model = model.to_str().unwrap();

    let first = causal(&["simulate", model, "--n", "200", "--seed", "11"]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let text = stdout(&first);
    assert_eq!(text.lines().next().unwrap(), "U1,U2,W1,X,O1");
    assert_eq!(text.lines().count(), 201);

    // Same flags, byte-identical bytes.
    let second = causal(&["simulate", model, "--n", "200", "--seed", "11"]);
    assert_eq!(first.stdout, second.stdout);

    // A different seed differs; n = 0 is a usage error.
    let other = causal(&["simulate", model, "--n", "200", "--seed", "12"]);
    assert_ne!(first.stdout, other.stdout);
    let zero = causal(&["simulate", model, "--n", "0", "--seed", "11"]);
    assert_eq!(code(&zero), 2);
}

// ── Estimation ───────────────────────────────────────────────────────────────

#[test]
fn estimate_ols_prints_table_and_bootstrap_intervals() {
    let dir = TempDir::new().unwrap();
    let model = export_model(dir.path(), "single-posttest");
    let csv = simulate_csv(dir.path(), &model, "2000", "7");
    let csv = csv.to_str().unwrap();

    let plain = causal(&["estimate", csv, "--method", "ols", "--outcome", "O1", "--terms", "X,W1"]);
    assert_eq!(code(&plain), 0, "{}", stderr(&plain));
    let text = stdout(&plain);
    assert!(text.lines().next().unwrap().starts_with("term"), "{text}");
    for term in ["Intercept", "X", "W1"] {
        assert!(text.contains(term), "missing {term}: {text}");
    }

    // Bootstrap adds percentile intervals around the same point estimates.
    let booted = causal(&[
        "estimate", csv, "--method", "ols", "--outcome", "O1", "--terms", "X,W1",
        "--bootstrap", "200", "--seed", "5", "--format", "json",
    ]);
    assert_eq!(code(&booted), 0, "{}", stderr(&booted));
    let report: serde_json::Value = serde_json::from_str(&stdout(&booted)).expect("json report");
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let estimate = row["estimate"].as_f64().unwrap();
        let ci = row["ci"].as_array().expect("interval present");
        let (lo, hi) = (ci[0].as_f64().unwrap(), ci[1].as_f64().unwrap());
        assert!(lo <= estimate && estimate <= hi, "{lo} <= {estimate} <= {hi}");
    }

    // Interaction syntax builds product terms.
    let interacted = causal(&[
        "estimate", csv, "--method", "ols", "--outcome", "O1", "--terms", "X,W1,X*W1",
    ]);
    assert_eq!(code(&interacted), 0);
    assert!(stdout(&interacted).contains("X*W1"));

    // Unknown outcome column is a usage error.
    let bad = causal(&["estimate", csv, "--method", "ols", "--outcome", "NOPE", "--terms", "X"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn estimate_g_formula_with_one_period_matches_standardization() {
    let dir = TempDir::new().unwrap();
    let model = export_model(dir.path(), "single-posttest");
    let csv = simulate_csv(dir.path(), &model, "5000", "13");
    let csv = csv.to_str().unwrap();

    let standardized = causal(&[
        "estimate", csv, "--method", "standardize", "--treatment", "X", "--outcome", "O1",
        "--adjust", "W1", "--format", "json",
    ]);
    assert_eq!(code(&standardized), 0, "{}", stderr(&standardized));
    let std_report: serde_json::Value =
        serde_json::from_str(&stdout(&standardized)).expect("json means");

    let g_treated = causal(&[
        "estimate", csv, "--method", "g-formula", "--treatments", "X", "--confounders", "W1",
        "--outcome", "O1", "--regime", "1", "--format", "json",
    ]);
    assert_eq!(code(&g_treated), 0, "{}", stderr(&g_treated));
    let g_report: serde_json::Value = serde_json::from_str(&stdout(&g_treated)).expect("json mean");

    let treated = std_report["mean_treated"].as_f64().unwrap();
    let g_mean = g_report["mean"].as_f64().unwrap();
    assert!((treated - g_mean).abs() < 1e-12, "{treated} vs {g_mean}");
}

#[test]
fn estimate_iptw_msm_fits_weighted_treatment_products() {
    let dir = TempDir::new().unwrap();
    let model = export_model(dir.path(), "tv-feedback");
    let csv = simulate_csv(dir.path(), &model, "20000", "3");
    let csv = csv.to_str().unwrap();

    let fitted = causal(&[
        "estimate", csv, "--method", "iptw-msm", "--treatments", "X2,X3",
        "--denominators", "X1,L2|X2,L3", "--outcome", "Y",
    ]);
    assert_eq!(code(&fitted), 0, "{}", stderr(&fitted));
    let text = stdout(&fitted);
    for term in ["Intercept", "X2", "X3", "X2*X3"] {
        assert!(text.contains(term), "missing {term}: {text}");
    }

    // Mismatched block count is a usage error.
    let lopsided = causal(&[
        "estimate", csv, "--method", "iptw-msm", "--treatments", "X2,X3",
        "--denominators", "X1,L2", "--outcome", "Y",
    ]);
    assert_eq!(code(&lopsided), 2);
}

#[test]
fn estimate_its_and_rd_recover_noiseless_segment_parameters() {
    let dir = TempDir::new().unwrap();

    let mut its = String::from("t,y\n");
    for i in 0..100 {
        let t = i as f64;
        let post = if t >= 50.0 { 1.0 } else { 0.0 };
        let y = 2.0 + 0.5 * t + 3.0 * post + 0.2 * post * (t - 50.0);
        its.push_str(&format!("{t},{y}\n"));
    }
    let its_path = dir.path().join("its.csv");
    std::fs::write(&its_path, its).unwrap();
    let fitted = causal(&[
        "estimate", its_path.to_str().unwrap(), "--method", "its", "--time", "t",
        "--outcome", "y", "--interruption", "50", "--format", "json",
    ]);
    assert_eq!(code(&fitted), 0, "{}", stderr(&fitted));
    let report: serde_json::Value = serde_json::from_str(&stdout(&fitted)).unwrap();
    let expected = [("Intercept", 2.0), ("Slope", 0.5), ("LevelChange", 3.0), ("SlopeChange", 0.2)];
    for (row, (term, value)) in report["rows"].as_array().unwrap().iter().zip(expected) {
        assert_eq!(row["term"], term);
        assert!((row["estimate"].as_f64().unwrap() - value).abs() < 1e-9);
    }

    let mut rd = String::from("a,o\n");
    for i in 0..400 {
        let a = 40.0 + 20.0 * (i as f64 + 0.5) / 400.0;
        let z = if a >= 50.0 { 1.0 } else { 0.0 };
        let o = 1.5 + 0.8 * (a - 50.0) + 2.5 * z + 0.6 * z * (a - 50.0);
        rd.push_str(&format!("{a},{o}\n"));
    }
    let rd_path = dir.path().join("rd.csv");
    std::fs::write(&rd_path, rd).unwrap();
    let fitted = causal(&[
        "estimate", rd_path.to_str().unwrap(), "--method", "rd", "--running", "a",
        "--outcome", "o", "--cutoff", "50", "--bandwidth", "10", "--format", "json",
    ]);
    assert_eq!(code(&fitted), 0, "{}", stderr(&fitted));
    let report: serde_json::Value = serde_json::from_str(&stdout(&fitted)).unwrap();
    let expected =
        [("Intercept", 1.5), ("Running", 0.8), ("Above", 2.5), ("Running*Above", 0.6)];
    for (row, (term, value)) in report["rows"].as_array().unwrap().iter().zip(expected) {
        assert_eq!(row["term"], term);
        assert!((row["estimate"].as_f64().unwrap() - value).abs() < 1e-9);
    }

    // rd without a cutoff, and bootstrap on a design without resampling
    // support, are usage errors.
    let no_cutoff = causal(&[
        "estimate", rd_path.to_str().unwrap(), "--method", "rd", "--running", "a",
        "--outcome", "o", "--bandwidth", "10",
    ]);
    assert_eq!(code(&no_cutoff), 2);
    let booted_its = causal(&[
        "estimate", its_path.to_str().unwrap(), "--method", "its", "--time", "t",
        "--outcome", "y", "--interruption", "50", "--bootstrap", "200", "--seed", "1",
    ]);
    assert_eq!(code(&booted_its), 2);
}

// ── Reproduction and catalog ─────────────────────────────────────────────────

#[test]
fn reproduce_exits_zero_when_every_verdict_is_expected() {
    let output = causal(&["reproduce", "single-posttest", "--n", "100000", "--seed", "42"]);
    assert_eq!(code(&output), 0, "{}", stderr(&output));
    let text = stdout(&output);
    assert!(
        text.lines().next().unwrap().starts_with("scenario=single-posttest n=100000 seed=42"),
        "{text}"
    );
    assert!(text.contains("matches-truth"), "{text}");
    assert!(text.contains("biased-as-expected"), "{text}");
    assert!(!text.contains("mismatch"), "{text}");

    // Byte-identical on a rerun with the same flags.
    let again = causal(&["reproduce", "single-posttest", "--n", "100000", "--seed", "42"]);
    assert_eq!(output.stdout, again.stdout);
}

#[test]
fn reproduce_exits_one_on_a_mismatch_and_two_on_unknown_input() {
    // At n = 300 the sequential g-formula hits empty history strata, so the
    // rows come back as mismatches and the command reports failure.
    let mismatch = causal(&[
        "reproduce", "tv-feedback", "--methods", "g-formula", "--n", "300", "--seed", "2",
    ]);
    assert_eq!(code(&mismatch), 1, "{}", stderr(&mismatch));
    assert!(stdout(&mismatch).contains("mismatch"));

    let unknown = causal(&["reproduce", "not-a-scenario", "--n", "100", "--seed", "1"]);
    assert_eq!(code(&unknown), 2);

    let bad_method = causal(&[
        "reproduce", "single-posttest", "--methods", "levitate", "--n", "100", "--seed", "1",
    ]);
    assert_eq!(code(&bad_method), 2);
}

#[test]
fn catalog_lists_scenarios_and_exports_models() {
    let listing = causal(&["catalog"]);
    assert_eq!(code(&listing), 0);
    let text = stdout(&listing);
    let ids = [
        "single-posttest",
        "tv-no-unmeasured",
        "tv-unmeasured",
        "tv-unmeasured-case1",
        "tv-unmeasured-case2",
        "tv-feedback",
    ];
    assert_eq!(text.lines().count(), ids.len());
    for id in ids {
        assert!(text.lines().any(|line| line.starts_with(id)), "missing {id}: {text}");
    }

    let export = causal(&["catalog", "--export", "tv-feedback"]);
    assert_eq!(code(&export), 0);
    let model: serde_json::Value = serde_json::from_str(&stdout(&export)).expect("json model");
    assert!(model["equations"]["Y"].is_object(), "{model}");

    let unknown = causal(&["catalog", "--export", "nothing"]);
    assert_eq!(code(&unknown), 2);
}

// ── Export and environment ───────────────────────────────────────────────────

#[test]
fn export_dot_renders_graphs_and_highlights_backdoor_edges() {
    let dir = TempDir::new().unwrap();
    let dag = write_test_dag(dir.path());

    let plain = causal(&["export-dot", dag.to_str().unwrap()]);
    assert_eq!(code(&plain), 0, "{}", stderr(&plain));
    let text = stdout(&plain);
    assert!(text.starts_with("digraph"), "{text}");
    assert!(text.contains("\"Z\" -> \"X\""), "{text}");
    assert!(!text.contains("color=red"), "{text}");

    let highlighted = causal(&["export-dot", dag.to_str().unwrap(), "--highlight", "X,Y"]);
    assert_eq!(code(&highlighted), 0);
    let text = stdout(&highlighted);
    assert!(text.contains("color=red"), "{text}");

    // Model files work too: the embedded graph is extracted.
    let model = export_model(dir.path(), "single-posttest");
    let from_model = causal(&["export-dot", model.to_str().unwrap()]);
    assert_eq!(code(&from_model), 0);
    assert!(stdout(&from_model).contains("\"X\" -> \"O1\""));
}

#[test]
fn worker_cap_environment_variable_is_validated_and_respected() {
    let dir = TempDir::new().unwrap();
    let model = export_model(dir.path(), "single-posttest");
    let csv = simulate_csv(dir.path(), &model, "500", "3");

    // A capped pool must still produce exactly the usual deterministic output.
    let capped = causal_with_env(
        &[
            "estimate", csv.to_str().unwrap(), "--method", "ols", "--outcome", "O1",
            "--terms", "X", "--bootstrap", "200", "--seed", "9",
        ],
        &[("CAUSAL_THREADS", "1")],
    );
    assert_eq!(code(&capped), 0, "{}", stderr(&capped));
    let free = causal(&[
        "estimate", csv.to_str().unwrap(), "--method", "ols", "--outcome", "O1",
        "--terms", "X", "--bootstrap", "200", "--seed", "9",
    ]);
    assert_eq!(capped.stdout, free.stdout);

    let invalid = causal_with_env(&["catalog"], &[("CAUSAL_THREADS", "zero")]);
    assert_eq!(code(&invalid), 2);
}
