//! End-to-end tests of the `wheelperc` binary: output schemas, exit
//! codes, JSON round-trips, determinism, and golden table files.

use std::process::{Command, Output};
use std::str::FromStr;

use serde_json::Value;
use wheelperc::linalg::{ratio, Rational};
use wheelperc::matchings::NoncrossingMatching;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wheelperc"));
    cmd.env_remove("WHEELPERC_CACHE_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn rational_field(v: &Value, key: &str) -> Rational {
    Rational::from_str(v[key].as_str().expect("string field")).expect("p/q form")
}

fn matching_field(v: &Value, key: &str) -> NoncrossingMatching {
    let arcs: Vec<(usize, usize)> = v[key]
        .as_array()
        .expect("arc array")
        .iter()
        .map(|a| (a[0].as_u64().unwrap() as usize, a[1].as_u64().unwrap() as usize))
        .collect();
    NoncrossingMatching::from_arcs(&arcs).expect("valid arcs")
}

#[test]
fn test_halfplane_arc() {
    let out = run(&["halfplane", "--matching", "[[1,2]]"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["value"], "3/8");
    assert_eq!(v["dyadic"], "3/2^3");
    assert_eq!(v["witness"]["passed"], true);
    assert_eq!(rational_field(&v, "value"), ratio(3, 8));
}

#[test]
fn test_prob_routes_agree_and_roundtrip() {
    let out = run(&["prob", "--matching", "[[1,4],[2,3]]", "--n", "4", "--route", "both"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["agree"], true);
    assert_eq!(rational_field(&v, "value"), ratio(2, 21));
    let parsed = matching_field(&v, "matching");
    assert_eq!(parsed, NoncrossingMatching::from_arcs(&[(1, 4), (2, 3)]).unwrap());
}

#[test]
fn test_matching_input_forms_normalize() {
    let arcs = run(&["prob", "--matching", "[[1,4],[2,3]]", "--n", "4"]);
    let openers = run(&["prob", "--matching", "1,2", "--n", "4"]);
    assert!(arcs.status.success() && openers.status.success());
    assert_eq!(arcs.stdout, openers.stdout);
}

#[test]
fn test_mu_distribution() {
    let out = run(&["mu", "--n", "3"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["asm"], "7");
    let weights = v["weights"].as_array().unwrap();
    assert_eq!(weights.len(), 5);
    let probs: Vec<Rational> = weights.iter().map(|w| rational_field(w, "probability")).collect();
    let expected = [ratio(2, 7), ratio(1, 7), ratio(1, 7), ratio(2, 7), ratio(1, 7)];
    assert_eq!(probs, expected);
    for w in weights {
        let m = matching_field(w, "matching");
        assert_eq!(m.order(), 3);
    }
}

#[test]
fn test_cmatrix_tilde_entries() {
    let out = run(&["cmatrix", "--n", "3", "--tilde"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 5);
    for (i, row) in entries.iter().enumerate() {
        for (j, cell) in row.as_array().unwrap().iter().enumerate() {
            let expected = if i == j {
                "1"
            } else if (i, j) == (1, 4) {
                "-1"
            } else {
                "0"
            };
            assert_eq!(cell, expected, "entry ({i},{j})");
        }
    }
}

#[test]
fn test_fpoly_terms() {
    let out = run(&["fpoly", "--matching", "1,3,5"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["k"], 3);
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["exponents"], serde_json::json!([1, 1, 1]));
    assert_eq!(terms[0]["coefficient"], "1");
}

#[test]
fn test_ct_asm_agrees() {
    let out = run(&["ct", "asm", "--n", "5"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["constant_term"], "429");
    assert_eq!(v["agree"], true);
}

#[test]
fn test_interpolate_nested_pair() {
    let out = run(&["interpolate", "--matching", "1,2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["k"], 2);
    assert_eq!(v["nodes"], serde_json::json!([3, 4, 5, 6]));
    assert_eq!(v["dyadic"], true);
    assert_eq!(v["witness"]["n"], 7);
    assert_eq!(v["witness"]["passed"], true);
    let coeffs: Vec<Rational> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| Rational::from_str(c.as_str().unwrap()).unwrap())
        .collect();
    assert_eq!(coeffs, [ratio(36, 1), ratio(433, 8), ratio(299, 16), ratio(59, 16)]);
    assert_eq!(rational_field(&v, "halfplane"), ratio(59, 1024));
}

#[test]
fn test_simulate_deterministic_across_threads() {
    let args = [
        "simulate",
        "--n",
        "4",
        "--event",
        "submatching:[[1,2]]",
        "--samples",
        "2000",
        "--seed",
        "7",
    ];
    let one = bin().args(args).args(["--threads", "1"]).output().unwrap();
    let four = bin().args(args).args(["--threads", "4"]).output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let v = stdout_json(&one);
    assert_eq!(v["exact"], "17/42");
    assert_eq!(v["samples"], 2000);
    let estimate = v["estimate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&estimate));
    let ci = v["ci99"].as_array().unwrap();
    assert!(ci[0].as_f64().unwrap() <= estimate && estimate <= ci[1].as_f64().unwrap());
}

#[test]
fn test_simulate_scientific_samples_and_events() {
    let out = run(&["simulate", "--n", "4", "--event", "anticluster:2", "--samples", "1e3"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["samples"], 1000);
    assert_eq!(v["exact"], "25/42");
    let out = run(&["simulate", "--n", "3", "--event", "pairs:[[1,6],[2,3]]", "--samples", "500"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["exact"], "2/7");
}

#[test]
fn test_verify_all_passes() {
    let out = run(&["verify", "--suite", "all", "--max-n", "4"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["failed"], 0);
    assert!(v["passed"].as_u64().unwrap() > 10);
}

#[test]
fn test_tables_anticluster_golden() {
    let out = run(&["tables", "--table", "anticluster"]);
    assert!(out.status.success());
    let golden = include_str!("golden/tables_anticluster.json");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}

#[test]
fn test_tables_submatching_golden() {
    let out = run(&["tables", "--table", "submatching", "--k", "2"]);
    assert!(out.status.success());
    let golden = include_str!("golden/tables_submatching_k2.json");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}

#[test]
fn test_anticluster_finite_and_limit() {
    let finite = run(&["anticluster", "--k", "2", "--n", "4"]);
    assert!(finite.status.success());
    assert_eq!(rational_field(&stdout_json(&finite), "value"), ratio(25, 42));
    let limit = run(&["anticluster", "--k", "4"]);
    assert!(limit.status.success());
    let v = stdout_json(&limit);
    assert_eq!(rational_field(&v, "value"), ratio(33, 512));
    assert_eq!(v["dyadic"], "33/2^9");
}

#[test]
fn test_exit_codes() {
    let usage = run(&["bogus"]);
    assert_eq!(usage.status.code(), Some(2));
    let resource = run(&["mu", "--n", "99"]);
    assert_eq!(resource.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&resource.stderr).contains("mu supports"));
    let bad_matching = run(&["prob", "--matching", "[[1,3]]", "--n", "4"]);
    assert_eq!(bad_matching.status.code(), Some(2));
}

#[test]
fn test_formats_render() {
    let csv = run(&["mu", "--n", "2", "--format", "csv"]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("matching,openers,alpha,probability\n"));
    assert_eq!(text.lines().count(), 3);
    let plain = run(&["prob", "--matching", "[[1,2]]", "--n", "3", "--format", "plain"]);
    assert!(plain.status.success());
    let text = String::from_utf8(plain.stdout).unwrap();
    assert!(text.contains("value: 3/7"));
}

#[test]
fn test_cache_roundtrip() {
    let dir = std::env::temp_dir().join(format!("wheelperc-cache-{}", std::process::id()));
    let run_cached = || {
        bin()
            .args(["mu", "--n", "3"])
            .env("WHEELPERC_CACHE_DIR", &dir)
            .output()
            .unwrap()
    };
    let first = run_cached();
    assert!(first.status.success());
    assert!(dir.join("mu_v1_n3.json").exists());
    let second = run_cached();
    assert!(second.status.success());
    assert!(String::from_utf8_lossy(&second.stderr).contains("cache: loaded mu n=3"));
    assert_eq!(first.stdout, second.stdout);
    std::fs::remove_dir_all(&dir).ok();
}
