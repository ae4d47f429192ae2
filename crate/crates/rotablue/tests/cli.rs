use std::process::{Command, Output};

use rotablue::report::{SolutionReport, Verdict, VerifyReport};
use rotablue::simulate::SimulationReport;

fn rotablue(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotablue"))
        .args(args)
        .env("ROTABLUE_THREADS", "2")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn analyze_patterson() {
    let out = rotablue(&["analyze", "--pattern", "111111", "--rho", "0.9"]);
    assert_eq!(code(&out), 0);
    let r = SolutionReport::from_json(&stdout(&out)).unwrap();
    assert!((r.a[0] - 0.7942).abs() < 5e-4);
    assert!((r.variance.unwrap() - 0.1176).abs() < 5e-4);
    assert_eq!(r.assumption1, Verdict::Pass);
    assert_eq!(r.assumption2, Verdict::Pass);
}

#[test]
fn analyze_scheme_alias_matches_bits() {
    let a = rotablue(&["analyze", "--scheme", "2-2-2", "--rho", "0.7"]);
    let b = rotablue(&["analyze", "--pattern", "110011", "--rho", "0.7"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    let r = SolutionReport::from_json(&stdout(&a)).unwrap();
    for (g, w) in r.a.iter().zip([0.4060, 0.0227, 0.0560]) {
        assert!((g - w).abs() < 5e-4);
    }
}

#[test]
fn emitted_json_round_trips() {
    let out = rotablue(&["analyze", "--pattern", "1111000000001111", "--rho", "0.9"]);
    let text = stdout(&out);
    let r = SolutionReport::from_json(&text).unwrap();
    assert_eq!(r.to_json() + "\n", text);
}

#[test]
fn usage_errors_exit_one() {
    let out = rotablue(&["analyze", "--pattern", "11", "--rho", "1.5"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho"));
    assert_eq!(
        code(&rotablue(&["analyze", "--pattern", "1021", "--rho", "0.5"])),
        1
    );
    assert_eq!(code(&rotablue(&["analyze", "--rho", "0.5"])), 1);
    assert_eq!(
        code(&rotablue(&[
            "analyze",
            "--pattern",
            "11",
            "--scheme",
            "1-1-1",
            "--rho",
            "0.5"
        ])),
        1
    );
    assert_eq!(code(&rotablue(&["frobnicate"])), 1);
    assert_eq!(
        code(&rotablue(&[
            "sweep",
            "--pattern",
            "111111",
            "--rho-grid",
            "-0.2:0.2:0.1"
        ])),
        1
    );
    assert_eq!(
        code(&rotablue(&[
            "verify",
            "--pattern",
            "111111",
            "--rho",
            "0.9",
            "--horizon",
            "0"
        ])),
        1
    );
    assert_eq!(
        code(&rotablue(&[
            "analyze",
            "--pattern",
            "111111",
            "--rho",
            "0.9",
            "--tol-rank",
            "-1"
        ])),
        1
    );
}

#[test]
fn assumption_failures_have_their_own_codes() {
    // an absurd interval tolerance swallows every root
    let out = rotablue(&[
        "analyze",
        "--pattern",
        "111111",
        "--rho",
        "0.9",
        "--tol-root",
        "10",
    ]);
    assert_eq!(code(&out), 2);
    let r = SolutionReport::from_json(&stdout(&out)).unwrap();
    assert_eq!(r.assumption1, Verdict::Fail);
    assert_eq!(r.assumption2, Verdict::NotEvaluated);
    assert_eq!(r.roots.len(), 1);

    // an absurd rank cutoff drops singular values
    let out = rotablue(&[
        "analyze",
        "--pattern",
        "110011",
        "--rho",
        "0.7",
        "--tol-rank",
        "0.9",
    ]);
    assert_eq!(code(&out), 3);
    let r = SolutionReport::from_json(&stdout(&out)).unwrap();
    assert_eq!(r.assumption2, Verdict::Fail);
    assert_eq!(r.a.len(), 3);
    assert!(r.variance.is_none());
}

#[test]
fn inconsistent_multiplier_system_is_a_numerical_failure() {
    let out = rotablue(&["analyze", "--pattern", "1001011", "--rho", "0.5"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("inconsistent-system"));
}

#[test]
fn verify_passes_and_detects_corruption() {
    let out = rotablue(&[
        "verify",
        "--pattern",
        "1111000000001111",
        "--rho",
        "0.9",
        "--horizon",
        "60",
    ]);
    assert_eq!(code(&out), 0);
    let r: VerifyReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(r.pass && r.oracle.pass);
    assert_eq!(r.oracle.horizon, 60);

    assert_eq!(
        code(&rotablue(&[
            "verify",
            "--pattern",
            "1101101",
            "--rho",
            "0.5"
        ])),
        0
    );

    let out = rotablue(&[
        "verify",
        "--pattern",
        "1101101",
        "--rho",
        "0.5",
        "--corrupt-a1",
        "1e-3",
    ]);
    assert_eq!(code(&out), 5);
    let r: VerifyReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!r.pass && !r.oracle.pass);
}

#[test]
fn verify_json_has_the_oracle_fields() {
    let out = rotablue(&["verify", "--pattern", "111111", "--rho", "0.9"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for key in ["T", "variance", "variance_gap", "max_weight_gap", "pass"] {
        assert!(v["oracle"].get(key).is_some(), "{key}");
    }
    assert_eq!(v["oracle"]["T"], 50);
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate",
        "--pattern",
        "111111",
        "--rho",
        "0.9",
        "--reps",
        "500",
        "--seed",
        "7",
    ];
    let a = rotablue(&args);
    let b = rotablue(&args);
    assert_eq!(stdout(&a), stdout(&b));
    let r: SimulationReport = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(r.replications, 500);
    assert_eq!(r.seed, 7);
    assert!([0, 5].contains(&code(&a)));
    assert_eq!(
        code(&rotablue(&[
            "simulate",
            "--pattern",
            "111111",
            "--rho",
            "0.9",
            "--reps",
            "50"
        ])),
        1
    );
}

#[test]
fn sweep_writes_one_row_per_rho() {
    let out = rotablue(&["sweep", "--pattern", "111111", "--rho-grid", "0.1:0.9:0.1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| &r[3] == "PASS"));
    assert_eq!(&rows[8][0], "0.9");
}

#[test]
fn sweep_flags_failures_without_failing() {
    let out = rotablue(&["sweep", "--pattern", "1001011", "--rho-grid", "0.5,0.9"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).lines().skip(1).all(|l| l.contains("FAIL")));
}

#[test]
fn sweep_cps_row_matches_published_coefficients() {
    let out = rotablue(&["sweep", "--scheme", "4-8-4", "--rho-grid", "0.9"]);
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let row = reader.records().next().unwrap().unwrap();
    let a: Vec<f64> = (5..14).map(|k| row[k].parse().unwrap()).collect();
    let published = [
        0.7429, 0.0019, 0.0023, 0.0029, 0.0037, 0.0049, 0.0066, 0.0088, 0.0119,
    ];
    for (g, w) in a.iter().zip(published) {
        assert!((g - w).abs() < 5e-4);
    }
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = rotablue(&[
        "analyze",
        "--pattern",
        "1101101",
        "--rho",
        "0.5",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 22);

    let bad = dir.path().join("missing").join("r.json");
    let out = rotablue(&[
        "analyze",
        "--pattern",
        "11",
        "--rho",
        "0.5",
        "--out",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 6);
}

#[test]
fn negative_rho_is_accepted() {
    let out = rotablue(&[
        "analyze",
        "--pattern",
        "1101101",
        "--rho",
        "-0.5",
        "--format",
        "pretty",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("a_2"));
}
