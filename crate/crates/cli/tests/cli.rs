use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_definetti"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

type Record = std::collections::HashMap<String, String>;

fn records(csv_text: &str) -> Vec<Record> {
    csv::Reader::from_reader(csv_text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .expect("well-formed CSV")
}

fn find<'a>(rows: &'a [Record], k: &str, metric: &str, bound: &str) -> &'a Record {
    rows.iter()
        .find(|r| r["k"] == k && r["metric"] == metric && r["bound_id"] == bound)
        .unwrap_or_else(|| panic!("no row k={k} metric={metric} bound={bound}"))
}

fn write_model(name: &str, json: &str) -> PathBuf {
    let path = tmp(name);
    fs::write(&path, json).unwrap();
    path
}

#[test]
fn sampling_two_by_two() {
    let o = run(&["sampling", "--urn", "2,2", "--k", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = records(&stdout(&o));
    assert_eq!(find(&rows, "2", "tv", "")["value"], "1/3");
    let kl: f64 = find(&rows, "2", "kl", "")["value"].parse().unwrap();
    assert!((kl - 0.056633).abs() < 1e-6);
    let stam = find(&rows, "2", "kl", "stam");
    assert_eq!(stam["bound_value"], "1/9");
    assert_eq!(stam["pass"], "true");
    assert!(find(&rows, "2", "tv", "")["note"].contains("H={(2,0):1/6"));
}

#[test]
fn sampling_uniform_urn_meets_the_exact_identity() {
    let o = run(&["sampling", "--urn", "1,1,1", "--k", "2", "--metric", "tv"]);
    assert!(o.status.success());
    let rows = records(&stdout(&o));
    let exact = find(&rows, "2", "tv", "exact_tv_uniform");
    assert_eq!(exact["value"], "2/3");
    assert_eq!(exact["bound_value"], "2/3");
    assert!(rows.iter().all(|r| r["metric"] == "tv"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["sampling", "--urn", "2,2", "--k", "0"][..],
        &["sampling", "--urn", "2,2", "--k", "5"],
        &["sampling", "--urn", "2,x", "--k", "1"],
        &["verify", "--scope", "medium"],
        &["bounds-table", "--k", "2"],
        &["--precision-bits", "49", "sampling", "--urn", "2,2", "--k", "1"],
        &["sweep", "--n-range", "3", "--k-range", "1", "--bounds", "nonsense"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn definetti_pair_model_is_tight() {
    let path = write_model(
        "pair.json",
        r#"{"alphabet_size": 2, "n": 2, "type_weights": [{"counts": [1, 1], "weight": "1"}]}"#,
    );
    let o = run(&["definetti", "--model", path.to_str().unwrap(), "--k", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = records(&stdout(&o));
    let new2 = find(&rows, "2", "kl", "new2");
    let gap: f64 = new2["value"].parse().unwrap();
    assert!((gap - std::f64::consts::LN_2).abs() < 1e-12);
    assert!(new2["note"].contains("tight"));
    assert_eq!(find(&rows, "2", "tv", "df_finite")["pass"], "true");
    assert_eq!(find(&rows, "2", "tv", "")["value"], "1");
}

#[test]
fn definetti_permutation_model_meets_the_converse() {
    let path = tmp("perm3.json");
    let o = run(&[
        "model",
        "--kind",
        "permutation",
        "--n",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = run(&[
        "definetti",
        "--model",
        path.to_str().unwrap(),
        "--k",
        "2",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    let yu = rows.iter().find(|r| r["bound_id"] == "yu_converse").unwrap();
    let gap: f64 = yu["value"].as_str().unwrap().parse().unwrap();
    assert!((gap - 1.5f64.ln()).abs() < 1e-12);
    assert_eq!(yu["pass"], true);
    assert!(yu["note"].as_str().unwrap().contains("tight"));
    assert_eq!(yu["c"], 3);
}

#[test]
fn definetti_rejects_unnormalized_weights() {
    let path = write_model(
        "seven_eighths.json",
        r#"{"alphabet_size": 2, "n": 2, "type_weights": [
            {"counts": [2, 0], "weight": "1/2"}, {"counts": [1, 1], "weight": "3/8"}]}"#,
    );
    let o = run(&["definetti", "--model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("type_weights sum ≠ 1"), "{}", stderr(&o));

    let path = write_model(
        "unknown_field.json",
        r#"{"alphabet_size": 2, "n": 2, "type_weights": [], "x": 1}"#,
    );
    assert_eq!(
        run(&["definetti", "--model", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn model_files_round_trip_through_the_tool() {
    let path = tmp("random_model.json");
    let o = run(&[
        "model",
        "--kind",
        "random",
        "--c",
        "3",
        "--n",
        "6",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let first = fs::read_to_string(&path).unwrap();
    let o = run(&["definetti", "--model", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let again = run(&["model", "--kind", "random", "--c", "3", "--n", "6", "--seed", "7"]);
    assert_eq!(stdout(&again), first);
}

#[test]
fn bounds_table_reports_both_conventions() {
    let o = run(&["bounds-table", "--c", "2", "--n", "3", "--k", "2"]);
    assert!(o.status.success());
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 17);
    let general = find(&rows, "2", "tv", "df_general");
    assert_eq!(general["bound_value"], "2/3");
    assert!(general["note"].contains("half_l1=1/3"));
    assert_eq!(find(&rows, "2", "kl", "new1")["bound_value"], "1/2");
    assert_eq!(find(&rows, "2", "kl", "jgk_urn")["valid"], "false");

    let o = run(&["bounds-table", "--urn", "2,2", "--k", "2"]);
    let rows = records(&stdout(&o));
    let jgk: f64 = find(&rows, "2", "kl", "jgk_urn")["bound_value"].parse().unwrap();
    assert!((jgk - 0.268101).abs() < 1e-6);
}

#[test]
fn registry_export_is_json() {
    let o = run(&["registry", "--format", "json"]);
    assert!(o.status.success());
    let specs: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(specs.len(), 17);
    assert_eq!(specs[0]["id"], "df_general");
}

#[test]
fn sweep_uniform_freedman_slack_is_nonnegative() {
    let o = run(&["sweep", "--n-range", "2..6", "--k-range", "2", "--urns", "uniform"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = records(&stdout(&o));
    let slacks: Vec<f64> = rows
        .iter()
        .filter(|r| r["bound_id"] == "freedman_upper")
        .map(|r| r["slack"].parse().unwrap())
        .collect();
    assert_eq!(slacks.len(), 5);
    assert!(slacks.iter().all(|&s| s >= 0.0));
}

#[test]
fn sweep_single_draw_has_zero_divergence() {
    let o = run(&["sweep", "--n-range", "3", "--k-range", "1..3", "--urns", "uniform"]);
    let rows = records(&stdout(&o));
    assert_eq!(find(&rows, "1", "tv", "")["value"], "0");
    let kl: f64 = find(&rows, "1", "kl", "")["value"].parse().unwrap();
    assert_eq!(kl, 0.0);
    let ks: Vec<&str> = rows.iter().map(|r| r["k"].as_str()).collect();
    assert!(ks.windows(2).all(|w| w[0] <= w[1]), "rows are ordered by k");
}

#[test]
fn sweep_empty_range_is_header_only() {
    let o = run(&["sweep", "--n-range", "5..4", "--k-range", "1"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "subject_id,c,n,k,metric,value,bound_id,bound_value,convention,valid,pass,slack,error_bound,note\n"
    );
}

#[test]
fn sweep_reports_infeasible_cells() {
    let o = run(&["sweep", "--c-range", "2", "--n-range", "2", "--k-range", "3"]);
    assert!(o.status.success());
    let rows = records(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["valid"], "false");
    assert!(rows[0]["note"].contains("k > n"));
}

#[test]
fn verify_fast_passes() {
    let o = run(&["verify", "--scope", "fast"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# verify scope=fast seed=0x00def1e771202025"));
    assert!(out.contains("result: PASS"));
}

#[test]
fn verify_detects_a_corrupted_bound() {
    let o = run(&[
        "verify",
        "--scope",
        "full",
        "--scale-bound",
        "stam=1/100",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["passed"], false);
    let first = summary["failures"][0].as_str().unwrap();
    assert!(first.contains("stam") && first.contains("urn("), "{first}");
    assert!(stderr(&o).contains("stam"));
}
