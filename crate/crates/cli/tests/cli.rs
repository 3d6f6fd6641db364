use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use frechet_skew::{DistributionSpec, Family};
use frechet_skew_cli::parse_spec_text;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_frechet-skew");

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = child.stdin.take().unwrap();
    if let Some(text) = stdin {
        input.write_all(text.as_bytes()).unwrap();
    }
    drop(input);
    child.wait_with_output().unwrap()
}

fn write_spec(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

const EXP1: &str = r#"{"family":"exponential","params":{"lambda":1}}"#;
const LOGNORMAL: &str = r#"{"family":"lognormal","params":{"mu":0,"sigma2":1}}"#;

#[test]
fn pmean_prints_ln2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "exp1.json", EXP1);
    let out = run(&["pmean", "--dist", &spec, "--p", "1"], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("νp = 0.693147"), "{}", stdout(&out));
}

#[test]
fn classify_writes_report_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "lognormal.json", LOGNORMAL);
    let report = dir.path().join("report.json");
    let out = run(
        &[
            "classify",
            "--dist",
            &spec,
            "--grid",
            "geometric:0.25..6:16",
            "--full-domain",
            "--output",
            report.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out), "truly_mode_positive (full domain)");
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["classification"], "truly_mode_positive_full_domain");
    let curve_path = json["curve_csv_path"].as_str().unwrap();
    let curve = std::fs::read_to_string(curve_path).unwrap();
    assert!(curve.starts_with("p,nu_p,H_p,dnu_dp,method,residual\n"));
    assert_eq!(curve.lines().count(), 17);
}

#[test]
fn dist_from_stdin() {
    let out = run(&["pmean", "--dist", "-", "--p", "2"], Some(EXP1));
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let value: f64 = text
        .trim_start_matches("νp = ")
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 1.0).abs() < 1e-12, "{text}");
}

#[test]
fn invalid_input_exits_1() {
    let cases: [(&[&str], Option<&str>, &str); 5] = [
        (
            &["pmean", "--dist", "-", "--p", "2"],
            Some(r#"{"family":"gamma","params":{"alpha":-1,"lambda":1}}"#),
            "InvalidParams",
        ),
        (
            &["pmean", "--dist", "-", "--p", "2"],
            Some("{\"family\":\"gamma\",\n\"params\":{\"alpha\":1,\"lambda\":1},\"colour\":3}"),
            "InvalidSpec",
        ),
        (
            &["curve", "--dist", "-", "--grid", "geometric:2..1:8"],
            Some(EXP1),
            "InvalidGrid",
        ),
        (&["pmean", "--dist", "/nonexistent/spec.json", "--p", "1"], None, "Io"),
        (
            &["tailbone", "--dist", "-", "--n", "100", "--grid", "linear:1..3:3"],
            Some(EXP1),
            "Usage",
        ),
    ];
    for (args, stdin, kind) in cases {
        let out = run(args, stdin);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = stderr_json(&out);
        assert_eq!(err["error"], kind, "{err}");
        assert_eq!(err["exit_code"], 1);
    }
}

#[test]
fn unknown_key_is_named_with_position() {
    let err = parse_spec_text(
        "{\"family\":\"pareto\",\n\"params\":{\"alpha\":3},\"colour\":1}",
        "spec.json",
    )
    .unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("`colour`") && msg.contains("line 2"), "{msg}");
}

#[test]
fn spec_examples_parse() {
    let p = parse_spec_text(r#"{"family":"pareto","params":{"alpha":3}}"#, "-").unwrap();
    assert_eq!(p, DistributionSpec::pareto(3.0));
    let t = parse_spec_text(r#"{"family":"custom","grid":{"x":[0,1],"f":[2,0]}}"#, "-").unwrap();
    assert_eq!(t.family, Family::Custom);
    assert!(frechet_skew::Distribution::new(t).is_ok());
}

#[test]
fn numerical_failure_exits_2() {
    let out = run(&["pmean", "--dist", "-", "--p", "128"], Some(LOGNORMAL));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "NoBracket");
    // Outside the moment domain the tail integral diverges.
    let out = run(
        &["pmean", "--dist", "-", "--p", "2"],
        Some(r#"{"family":"pareto","params":{"alpha":0.5}}"#),
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "DivergentIntegral");
}

#[test]
fn strict_indeterminate_exits_3() {
    // Three-cluster mixture whose p-means first drift left, then right.
    let n = 3801;
    let normal = |t: f64, m: f64, s: f64| (-0.5 * ((t - m) / s).powi(2)).exp() / s;
    let x: Vec<f64> = (0..n).map(|i| -12.0 + 38.0 * i as f64 / (n - 1) as f64).collect();
    let f: Vec<f64> = x
        .iter()
        .map(|&t| 0.8 * normal(t, 0.0, 1.0) + 0.15 * normal(t, -8.0, 0.5) + 0.05 * normal(t, 20.0, 0.5))
        .collect();
    let area: f64 = x
        .windows(2)
        .zip(f.windows(2))
        .map(|(x, f)| 0.5 * (x[1] - x[0]) * (f[0] + f[1]))
        .sum();
    let f: Vec<f64> = f.iter().map(|v| v / area).collect();
    let spec = serde_json::json!({"family": "custom", "grid": {"x": x, "f": f}}).to_string();
    let args = ["classify", "--dist", "-", "--grid", "linear:1..4:8"];
    let lax = run(&args, Some(&spec));
    assert_eq!(lax.status.code(), Some(0), "{}", String::from_utf8_lossy(&lax.stderr));
    assert!(stdout(&lax).starts_with("indeterminate"), "{}", stdout(&lax));
    let strict = run(&[&args[..], &["--strict"]].concat(), Some(&spec));
    assert_eq!(strict.status.code(), Some(3));
    assert_eq!(stderr_json(&strict)["error"], "Inconclusive");
}

#[test]
fn artifacts_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "exp1.json", EXP1);
    let mut outputs = Vec::new();
    for k in 0..2 {
        let curve = dir.path().join(format!("curve{k}.csv"));
        let traj = dir.path().join(format!("traj{k}.csv"));
        let a = run(&["curve", "--dist", &spec, "--output", curve.to_str().unwrap()], None);
        assert_eq!(a.status.code(), Some(0));
        let b = run(
            &[
                "tailbone",
                "--dist",
                &spec,
                "--dist",
                &spec,
                "--n",
                "2000",
                "--seed",
                "9",
                "--grid",
                "linear:1..3:3",
                "--output",
                traj.to_str().unwrap(),
            ],
            None,
        );
        assert_eq!(b.status.code(), Some(0), "{}", String::from_utf8_lossy(&b.stderr));
        outputs.push((std::fs::read(curve).unwrap(), std::fs::read(traj).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let traj = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(traj.starts_with("p,nu_1,nu_2,objective,iterations,converged\n"));
}

#[test]
fn tailbone_reads_samples_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("square.csv");
    std::fs::write(&csv, "x,y\n0,0\n2,0\n0,2\n2,2\n").unwrap();
    let out_path = dir.path().join("t.json");
    let out = run(
        &[
            "tailbone",
            "--samples",
            csv.to_str().unwrap(),
            "--grid",
            "linear:1..3:3",
            "--format",
            "json",
            "--output",
            out_path.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    for e in json["entries"].as_array().unwrap() {
        for v in e["nu"].as_array().unwrap() {
            assert!((v.as_f64().unwrap() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn dominance_single_p_json() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("d.json");
    let out = run(
        &[
            "dominance",
            "--dist",
            "-",
            "--p",
            "1",
            "--output",
            out_path.to_str().unwrap(),
        ],
        Some(EXP1),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "right_dominates_strictly (p = 1)");
    let json: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(json["verdict"], "right_dominates_strictly");
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(BIN)
        .args(["oracle-check", "--output-dir", "/nonexistent-dir-never-created"])
        .env(frechet_skew_cli::THREADS_ENV, "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "Usage");
}
