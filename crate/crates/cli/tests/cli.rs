use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

use hql_core::analysis::{InteriorConfig, LiouvilleConfig};
use hql_core::pde::{BoundaryData, Operator, ProblemSpec, SolverOptions};
use hql_core::suites::VerifyConfig;

fn hql(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hql")).args(args).output().expect("hql runs")
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &TempDir, name: &str, value: &Value) -> String {
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

/// Runs `hql <cmd> --config <cfg> --out <tmp>/<out>` and returns the output
/// directory and the process output.
fn run(dir: &TempDir, cmd: &str, config: &str, out: &str, extra: &[&str]) -> (PathBuf, Output) {
    let target = dir.path().join(out);
    let mut args = vec![cmd, "--config", config, "--out", target.to_str().unwrap()];
    args.extend_from_slice(extra);
    let output = hql(&args);
    (target, output)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn small_verify() -> Value {
    json!({ "schema": 1, "seed": 7, "dimensions": [2, 3], "samples": 200, "duality_samples": 50, "grid_samples": 2 })
}

fn quadratic_solve(rhs: f64) -> Value {
    json!({
        "schema": 1,
        "problem": {
            "dimension": 2, "nodes_per_axis": 13, "half_width": 1.0, "operator": "quotient21", "rhs": rhs,
            "boundary": { "kind": "quadratic", "form": { "a": [[3.0, 0.0], [0.0, 1.5]], "b": [0.0, 0.0], "c": 0.0 } }
        }
    })
}

fn without_schema(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["schema"], 1, "{}", path.display());
    v.as_object_mut().unwrap().remove("schema");
    v
}

#[test]
fn shipped_configs_match_the_built_in_defaults() {
    let dir = configs_dir();
    assert_eq!(without_schema(&dir.join("verify.json")), serde_json::to_value(VerifyConfig::default()).unwrap());
    assert_eq!(without_schema(&dir.join("liouville.json")), serde_json::to_value(LiouvilleConfig::default()).unwrap());
    assert_eq!(without_schema(&dir.join("interior.json")), serde_json::to_value(InteriorConfig::default()).unwrap());
    let solve = json!({
        "problem": ProblemSpec::new(2, 33, 1.0, Operator::Quotient21, 1.0, BoundaryData::ExactCubic { a: 3.0 }),
        "solver": SolverOptions::default(),
    });
    assert_eq!(without_schema(&dir.join("solve.json")), solve);
}

#[test]
fn verify_writes_a_passing_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "v.json", &small_verify());
    let (out, o) = run(&dir, "verify", &cfg, "out", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["result"]["all_pass"], true);
    let results = doc["result"]["results"].as_array().unwrap();
    assert!(results.iter().all(|r| r["samples"].as_u64().unwrap() > 0 && r["worst"].is_number()));
}

#[test]
fn verify_in_two_dimensions_includes_the_duality_check() {
    let dir = TempDir::new().unwrap();
    let mut v = small_verify();
    v["dimensions"] = json!([2]);
    let cfg = write_config(&dir, "v.json", &v);
    let (out, o) = run(&dir, "verify", &cfg, "out", &[]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_str(&fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    let duality: Vec<&Value> =
        doc["result"]["results"].as_array().unwrap().iter().filter(|r| r["property"] == "inverse_duality").collect();
    assert_eq!(duality.len(), 1);
    assert_eq!(duality[0]["n"], 2);
    assert_eq!(duality[0]["pass"], true);
}

#[test]
fn verify_requires_a_seed_and_accepts_it_on_the_command_line() {
    let dir = TempDir::new().unwrap();
    let mut v = small_verify();
    v.as_object_mut().unwrap().remove("seed");
    let cfg = write_config(&dir, "v.json", &v);
    let (out, o) = run(&dir, "verify", &cfg, "a", &[]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    let (out, o) = run(&dir, "verify", &cfg, "b", &["--seed", "7"]);
    assert_eq!(code(&o), 0);
    assert!(out.join("verify.json").exists());
}

#[test]
fn malformed_json_is_a_usage_error_with_no_output() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"schema\": 1, \"seed\": ").unwrap();
    let (out, o) = run(&dir, "verify", path.to_str().unwrap(), "out", &[]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn missing_or_wrong_schema_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let mut v = small_verify();
    v.as_object_mut().unwrap().remove("schema");
    let none = write_config(&dir, "none.json", &v);
    v["schema"] = json!(2);
    let two = write_config(&dir, "two.json", &v);
    assert_eq!(code(&run(&dir, "verify", &none, "a", &[]).1), 2);
    assert_eq!(code(&run(&dir, "verify", &two, "b", &[]).1), 2);
}

#[test]
fn bad_command_lines_are_usage_errors() {
    assert_eq!(code(&hql(&["frobnicate"])), 2);
    assert_eq!(code(&hql(&["verify"])), 2);
    assert_eq!(code(&hql(&["verify", "--out", "x", "--seed", "minus-one"])), 2);
    assert_eq!(code(&hql(&["--help"])), 0);
}

#[test]
fn invalid_thread_count_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "v.json", &small_verify());
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_hql"))
        .args(["verify", "--config", &cfg, "--out", out.to_str().unwrap()])
        .env("HQL_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn solve_writes_solution_report_and_plot() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "s.json", &quadratic_solve(1.0));
    let (out, o) = run(&dir, "solve", &cfg, "out", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let report = &doc["result"];
    assert!(report["final_residual"].as_f64().unwrap() <= report["tolerance"].as_f64().unwrap());
    assert!(report["admissibility_margin"].as_f64().unwrap() > 0.0);
    let bytes = fs::read(out.join("solution.hqlg")).unwrap();
    let u = hql_core::GridFunction::read_binary(&bytes[..]).unwrap();
    // Quadratic data with unit quotient are reproduced exactly.
    let worst = (0..u.grid().len())
        .map(|p| {
            let x = u.grid().point(p);
            (u.values()[p] - (1.5 * x[0] * x[0] + 0.75 * x[1] * x[1])).abs()
        })
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
    let csv = fs::read_to_string(out.join("solution.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 13 * 13);
    let svg = fs::read_to_string(out.join("residual.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    // Only the final files remain; temporaries were renamed away.
    let mut names: Vec<String> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["report.json", "residual.svg", "solution.csv", "solution.hqlg"]);
}

#[test]
fn nonpositive_rhs_is_rejected_before_solving() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "s.json", &quadratic_solve(0.0));
    let (out, o) = run(&dir, "solve", &cfg, "out", &[]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("right-hand side"));
    assert!(!out.exists());
}

#[test]
fn unsupported_dimension_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let mut v = quadratic_solve(1.0);
    v["problem"]["dimension"] = json!(4);
    let cfg = write_config(&dir, "s.json", &v);
    assert_eq!(code(&run(&dir, "solve", &cfg, "out", &[]).1), 3);
}

#[test]
fn stagnation_fixture_exits_with_the_solver_code() {
    let dir = TempDir::new().unwrap();
    let cfg = configs_dir().join("solve-stagnation.json");
    let (out, o) = run(&dir, "solve", cfg.to_str().unwrap(), "out", &[]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stagnation"));
    assert!(!out.exists());
}

#[test]
fn empty_liouville_fixture_list_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "l.json", &json!({ "schema": 1, "seed": 1, "fixtures": [], "random": [] }));
    let (out, o) = run(&dir, "liouville", &cfg, "out", &[]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn liouville_reports_quadratic_solutions() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "l.json",
        &json!({
            "schema": 1,
            "seed": 3,
            "fixtures": [{
                "id": "aniso2", "nodes_per_axis": 13,
                "form": { "a": [[3.0, 0.0], [0.0, 1.5]], "b": [0.5, -0.25], "c": 1.0 }
            }],
            "random": [{ "dimension": 2, "count": 1, "nodes_per_axis": 9 }]
        }),
    );
    let (out, o) = run(&dir, "liouville", &cfg, "out", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&fs::read_to_string(out.join("liouville.json")).unwrap()).unwrap();
    let entries = doc["result"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["id"], "aniso2");
    assert!(entries.iter().all(|e| e["fit"]["residual"].as_f64().unwrap() <= 1e-8));
}

#[test]
fn liouville_with_random_fixtures_needs_a_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "l.json",
        &json!({ "schema": 1, "random": [{ "dimension": 2, "count": 1, "nodes_per_axis": 9 }] }),
    );
    assert_eq!(code(&run(&dir, "liouville", &cfg, "out", &[]).1), 2);
}

fn small_interior() -> Value {
    json!({
        "schema": 1,
        "families": [
            { "id": "quad", "dimension": 2, "resolutions": [9, 17], "source": "fixed", "quadratic": true,
              "boundary": { "kind": "quadratic", "form": { "a": [[2.0, 0.0], [0.0, 2.0]], "b": [0.0, 0.0], "c": 0.0 } } },
            { "id": "cubic", "dimension": 2, "resolutions": [9, 17], "source": "fixed", "quadratic": false,
              "boundary": { "kind": "exact_cubic", "a": 3.0 } },
            { "id": "extreme", "dimension": 2, "resolutions": [17], "source": "fixed", "quadratic": false,
              "boundary": { "kind": "exact_cubic", "a": 1.001 } }
        ]
    })
}

#[test]
fn interior_keeps_going_past_a_failed_run_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "i.json", &small_interior());
    let (a, oa) = run(&dir, "interior", &cfg, "a", &[]);
    let (b, ob) = run(&dir, "interior", &cfg, "b", &[]);
    assert_eq!(code(&oa), 0, "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(code(&ob), 0);
    for name in ["interior.csv", "interior.json", "interior.svg"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let csv = fs::read_to_string(a.join("interior.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], hql_core::analysis::INTERIOR_CSV_HEADER);
    assert_eq!(lines.len(), 1 + 5);
    let failed: Vec<&&str> = lines.iter().filter(|l| l.contains(",failed,")).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("extreme"));
    let svg = fs::read_to_string(a.join("interior.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn solve_outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = configs_dir().join("solve.json");
    let (a, oa) = run(&dir, "solve", cfg.to_str().unwrap(), "a", &[]);
    let (b, ob) = run(&dir, "solve", cfg.to_str().unwrap(), "b", &[]);
    assert_eq!((code(&oa), code(&ob)), (0, 0));
    for name in ["solution.hqlg", "solution.csv", "report.json", "residual.svg"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}
