use std::fs;
use std::process::{Command, Output};

use serde_json::Value;
use tradeability_core::{esscher_shift, euro_price, valuate, AssetAggregates, FigureBase, HorizonSpec, ProjectModel};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tradeability"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn error_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().expect("stderr not empty");
    serde_json::from_str(line).expect("error is json")
}

fn default_models() -> (ProjectModel, AssetAggregates) {
    let b = FigureBase::default();
    (
        ProjectModel {
            b: b.b,
            sigma: b.sigma,
            phi: b.phi,
            lambda: b.lambda,
            e0: b.e0,
        },
        AssetAggregates {
            phi_x1: b.phi_x1,
            sigma_x: b.sigma_x,
            rho: b.rho,
            r: b.r,
        },
    )
}

#[test]
fn european_price_matches_library() {
    let o = run(&["price", "euro", "--T", "1.5", "--e0", "1.1", "--s0", "2", "--format", "json"]);
    let v = json(&o);
    let (mut m, a) = default_models();
    m.e0 = 1.1;
    let want = euro_price(1.5, 1.1, &esscher_shift(&m, &a)).price;
    assert!((v["scaled_price"].as_f64().unwrap() - want).abs() < 1e-6);
    assert!((v["price"].as_f64().unwrap() - 2.0 * want).abs() < 2e-6);
}

#[test]
fn premium_matches_library_valuation() {
    let v = json(&run(&["premium", "--T", "0.5", "--format", "json"]));
    let (m, a) = default_models();
    let want = valuate(&HorizonSpec::deterministic(0.5).unwrap(), 1.0, &esscher_shift(&m, &a), None).unwrap();
    assert!((v["factor"].as_f64().unwrap() - want.factor).abs() < 1e-6);
    assert!((v["premium"].as_f64().unwrap() - want.premium).abs() < 1e-6);
}

#[test]
fn exponential_american_reports_boundary_diagnostics() {
    let v = json(&run(&["price", "amer", "--vartheta", "0.6667", "--format", "json"]));
    let b_r = v["b_r"].as_f64().unwrap();
    let gamma = v["gamma_plus"].as_f64().unwrap();
    assert!(b_r > 1.0 && b_r.is_finite());
    assert!(gamma > 1.0);
    assert!(v["scaled_price"].as_f64().unwrap() >= v["european"].as_f64().unwrap());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"model": {"e0": 1.2}, "horizon": {"kind": "deterministic", "maturity": 2.5}, "format": "json"}"#,
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let v = json(&run(&["price", "euro", "--config", path]));
    assert_eq!(v["e0"].as_f64(), Some(1.2));
    assert_eq!(v["T"].as_f64(), Some(2.5));
    let v = json(&run(&["price", "euro", "--config", path, "--e0", "0.9"]));
    assert_eq!(v["e0"].as_f64(), Some(0.9));
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"model": {"e0": 1.0, "volatility": 0.3}}"#).unwrap();
    let o = run(&["price", "euro", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["kind"], "config");
}

#[test]
fn invalid_parameter_exits_with_two() {
    let o = run(&["premium", "--sigma", "-0.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"]["kind"], "invalid_parameter");
    let o = run(&["premium", "--phi", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_table_exits_with_two() {
    let o = run(&["table", "det-b1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn table_has_published_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = run(&["table", "det-b0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 33);
    assert!(lines[0].starts_with("block,sigma_x,T,e0,none;rho=0.5"));
    assert_eq!(lines[0].split(',').count(), 13);
    for l in &lines[1..] {
        for cell in l.split(',').skip(4) {
            let (_, decimals) = cell.split_once('.').unwrap();
            assert_eq!(decimals.len(), 3, "{cell}");
        }
    }
}

#[test]
fn exponential_table_labels_expected_horizon() {
    let o = run(&["table", "exp-b0"]);
    let text = stdout(&o);
    assert!(text.starts_with("block,sigma_x,expected_T,e0"));
    let horizons: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert!(horizons.iter().all(|h| ["0.5", "1.5", "2.5", "5"].contains(h)), "{horizons:?}");
}

#[test]
fn compare_reports_every_cell() {
    let o = run(&["table", "det-bneg", "--compare", "published"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 288);
    let report = String::from_utf8_lossy(&o.stderr);
    let max: f64 = report
        .split("max |delta| = ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .expect("summary line");
    assert!(max < 0.01, "{report}");
}

#[test]
fn compare_against_own_output_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let path = out.to_str().unwrap();
    assert!(run(&["table", "exp-bneg", "--out", path]).status.success());
    let o = run(&["table", "exp-bneg", "--compare", path, "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["unmatched"].as_u64(), Some(0));
    assert!(v["max_abs"].as_f64().unwrap() <= 5e-4);
}

#[test]
fn empty_figure_range_exits_with_two() {
    let o = run(&["figure", "horizon", "--points", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn figure_sweep_emits_paired_series() {
    let o = run(&["figure", "correlation", "--from", "-0.5", "--to", "0.5", "--points", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rho,deterministic,stochastic");
    assert_eq!(lines.len(), 4);
    let det: Vec<f64> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(det.windows(2).all(|w| w[1] >= w[0]), "{det:?}");
}

#[test]
fn verify_is_reproducible_for_a_seed() {
    let args = ["verify", "--paths", "4000", "--seed", "7", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(stdout(&a), stdout(&b));
    let checks = json(&a);
    let names: Vec<&str> = checks.as_array().unwrap().iter().map(|c| c["check"].as_str().unwrap()).collect();
    assert!(names.contains(&"martingale") && names.contains(&"american_ls"));
    let c = run(&["verify", "--paths", "4000", "--seed", "8", "--format", "json"]);
    assert_ne!(stdout(&a), stdout(&c));
}

#[test]
fn verify_zero_premium_scenario_checks_equality() {
    let o = run(&["verify", "--paths", "20000", "--b", "0", "--rho", "0.5", "--phi", "0", "--format", "json"]);
    let checks = json(&o);
    let eq = checks
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check"] == "american_equals_european")
        .expect("zero-premium check present");
    assert_eq!(eq["pass"], true);
}
