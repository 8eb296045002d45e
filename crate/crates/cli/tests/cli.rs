use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Self {
        let w = Work {
            dir: tempfile::tempdir().unwrap(),
        };
        w.file("F.csv", "x,w\n0,0.5\n1,0.5\n");
        w.file("G.csv", "x,w\n0,0.25\n2,0.75\n");
        w.file("U1.json", r#"{"kind":"uniform","a":0,"b":1}"#);
        w.file("U2.json", r#"{"kind":"uniform","a":0,"b":2}"#);
        w.file("C.csv", "u1,u2\n.25,.75\n.75,.25\n");
        w
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        self.run_env(args, &[])
    }

    fn run_env(&self, args: &[&str], env: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_wassercop"));
        cmd.current_dir(self.dir.path())
            .args(args)
            .env_remove("WASSERCOP_GRID_TOL");
        for (k, v) in env {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn compute_running_example() {
    let w = Work::new();
    let r = json(&w.run(&["compute", "--p", "1", "F.csv", "G.csv"]));
    assert_eq!(r["value"], 1.0);
    assert_eq!(r["method"], "QuantileIntegral");
    let r = json(&w.run(&["compute", "--p", "1", "--method", "cdf", "F.csv", "G.csv"]));
    assert_eq!(r["value"], 1.0);
    assert_eq!(r["method"], "CdfIntegral");
    let r = json(&w.run(&["compute", "--p", "2", "--method", "lp", "F.csv", "G.csv"]));
    assert_eq!(r["power_value"], 1.5);
    assert_eq!(r["method"], "OracleLP");
    let r = json(&w.run(&["compute", "--p", "2", "--method", "comonotone", "F.csv", "G.csv"]));
    assert_eq!(r["power_value"], 1.5);
}

#[test]
fn compute_same_input_is_zero() {
    let w = Work::new();
    let r = json(&w.run(&["compute", "--p", "2", "F.csv", "F.csv"]));
    assert_eq!(r["value"], 0.0);
}

#[test]
fn compute_shared_copula() {
    let w = Work::new();
    let r = json(&w.run(&[
        "compute",
        "--p",
        "2",
        "--copula",
        "C.csv",
        "--margins-f",
        "U1.json,U1.json",
        "--margins-g",
        "U2.json",
        "--margins-g",
        "U2.json",
    ]));
    assert_eq!(r["method"], "SharedCopulaSum");
    assert!((r["power_value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);
}

#[test]
fn compute_formats() {
    let w = Work::new();
    let csv = stdout(&w.run(&["compute", "--p", "1", "F.csv", "G.csv", "--format", "csv"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "p,q,value,power_value,method,error_estimate,lower,upper");
    assert!(lines[1].starts_with("1.0,,1.0,1.0,QuantileIntegral,"));
    let human = stdout(&w.run(&["compute", "--p", "1", "F.csv", "G.csv", "--format", "human"]));
    assert!(human.starts_with("W_1 = 1 via QuantileIntegral"));
    let out = w.path("r.json");
    let o = w.run(&["compute", "F.csv", "G.csv", "--out", out.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r["value"], 1.0);
}

#[test]
fn json_distribution_inputs() {
    let w = Work::new();
    w.file("H.json", r#"{"kind":"empirical","atoms":[[0,"1/2"],[1,0.5]]}"#);
    let r = json(&w.run(&["compute", "--p", "1", "H.json", "F.csv"]));
    assert_eq!(r["value"], 0.0);
    let r = json(&w.run(&["compute", "--p", "2", "U1.json", "U2.json", "--grid", "adaptive:1e-10"]));
    assert!((r["power_value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-8);
}

#[test]
fn grid_tolerance_env_override() {
    let w = Work::new();
    w.file("N.json", r#"{"kind":"normal","mean":0,"stddev":1}"#);
    let tight = json(&w.run(&["compute", "--p", "2", "N.json", "U1.json"]));
    let loose = json(&w.run_env(
        &["compute", "--p", "2", "N.json", "U1.json"],
        &[("WASSERCOP_GRID_TOL", "1e-3")],
    ));
    assert!(loose["error_estimate"].as_f64().unwrap() > tight["error_estimate"].as_f64().unwrap());
    let bad = w.run_env(&["compute", "N.json", "U1.json"], &[("WASSERCOP_GRID_TOL", "abc")]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn bounds_ratios() {
    let w = Work::new();
    let r = json(&w.run(&["bounds", "--p", "2", "--q", "1", "F.csv", "G.csv"]));
    assert_eq!(r["bounds"][0], r["bounds"][1]);
    assert_eq!(r["power_value"], 1.5);

    let r = json(&w.run(&[
        "bounds",
        "--p",
        "2",
        "--q",
        "1",
        "--copula",
        "C.csv",
        "--margins-f",
        "U1.json,U1.json",
        "--margins-g",
        "U2.json,U2.json",
    ]));
    let (lo, hi) = (r["bounds"][0].as_f64().unwrap(), r["bounds"][1].as_f64().unwrap());
    assert!((hi / lo - 2.0).abs() < 1e-12);
    assert_eq!(lo, r["power_value"].as_f64().unwrap());

    w.file("C3.csv", "0.5,0.5,0.5\n");
    let r = json(&w.run(&[
        "bounds",
        "--p",
        "1",
        "--q",
        "2",
        "--copula",
        "C3.csv",
        "--margins-f",
        "F.csv,F.csv,U1.json",
        "--margins-g",
        "G.csv,G.csv,U2.json",
    ]));
    let (lo, hi) = (r["bounds"][0].as_f64().unwrap(), r["bounds"][1].as_f64().unwrap());
    assert!((lo / hi - 3f64.powf(-0.5)).abs() < 1e-12);
}

#[test]
fn bounds_equal_exponents_is_usage_error() {
    let w = Work::new();
    let o = w.run(&["bounds", "--p", "2", "--q", "2", "F.csv", "G.csv"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
}

#[test]
fn verify_necessity_prints_witness() {
    let w = Work::new();
    let o = w.run(&["verify", "--suite", "necessity"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("PASS necessity witness"));
    assert!(s.contains("[[0.25, 0.25], [0.75, 0.75]]"));
    assert!(s.contains("LP = 0.25"));
}

#[test]
fn verify_corrupt_formula_fails() {
    let w = Work::new();
    for suite in ["comonotone", "formulas", "continuous", "necessity"] {
        let o = w.run(&["verify", "--suite", suite, "--corrupt", "formula"]);
        assert_eq!(code(&o), 1, "{suite}");
        assert!(stdout(&o).contains("FAIL"));
    }
}

#[test]
fn verify_default_seed_full_suite() {
    let w = Work::new();
    let o = w.run(&["verify"]);
    let s = stdout(&o);
    assert_eq!(
        s.lines()
            .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
            .count(),
        11
    );
    assert_eq!(code(&o), 0, "{s}");
}

#[test]
fn verify_json_is_deterministic() {
    let w = Work::new();
    let a = w.run(&["verify", "--suite", "sandwich", "--format", "json", "--seed", "7"]);
    let b = w.run(&["verify", "--suite", "sandwich", "--format", "json", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["properties"][0]["name"], "W_pq sandwich");
    let c = w.run(&["compute", "--p", "2", "U1.json", "U2.json"]);
    let d = w.run(&["compute", "--p", "2", "U1.json", "U2.json"]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn sample_running_example() {
    let w = Work::new();
    let s = stdout(&w.run(&["sample", "F.csv", "G.csv"]));
    let rows: Vec<&str> = s.lines().collect();
    assert_eq!(rows, ["u,x,y,mass", "0.125,0,0,0.25", "0.375,0,2,0.25", "0.75,1,2,0.5"]);
}

#[test]
fn sample_diagonal_and_point_masses() {
    let w = Work::new();
    let v = json(&w.run(&["sample", "G.csv", "G.csv", "--format", "json"]));
    for a in v.as_array().unwrap() {
        assert_eq!(a["x"], a["y"]);
    }
    w.file("P.json", r#"{"kind":"point_mass","x":0}"#);
    w.file("Q.csv", "x\n3\n");
    let v = json(&w.run(&["sample", "P.json", "Q.csv", "--format", "json"]));
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["x"], 0.0);
    assert_eq!(v[0]["y"], 3.0);
    assert_eq!(v[0]["mass"], 1.0);
}

#[test]
fn sample_parametric_grid() {
    let w = Work::new();
    let out = w.path("pairs.csv");
    let o = w.run(&[
        "sample",
        "U1.json",
        "U2.json",
        "--grid",
        "uniform:4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.contains("0.125,0.125,0.25,0.25"));
}

#[test]
fn oracle_witness_export() {
    let w = Work::new();
    w.file("mu.csv", "x,y\n.25,.25\n.75,.75\n");
    w.file("nu.csv", "x,y\n.25,.75\n.75,.25\n");
    let wit = w.path("wit.json");
    let r = json(&w.run(&[
        "oracle",
        "--p",
        "2",
        "mu.csv",
        "nu.csv",
        "--witness",
        wit.to_str().unwrap(),
    ]));
    assert_eq!(r["power_value"], 0.25);
    assert_eq!(r["method"], "OracleLP");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(wit).unwrap()).unwrap();
    let total: f64 = v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["mass"].as_f64().unwrap())
        .sum();
    assert_eq!(total, 1.0);
    assert_eq!(v["source"][0]["mass_exact"], "1/2");
    assert_eq!(v["target"].as_array().unwrap().len(), 2);

    w.file("a.csv", "x,w\n0,0.5\n1,0.5\n");
    w.file("b.csv", "x,w\n0,0.25\n2,0.75\n");
    let r = json(&w.run(&["oracle", "--p", "1", "a.csv", "b.csv"]));
    assert_eq!(r["value"], 1.0);
    let r = json(&w.run(&["oracle", "--p", "2", "--q", "1", "mu.csv", "nu.csv"]));
    assert_eq!(r["q"], 1.0);
    assert_eq!(r["power_value"], 0.25);
}

#[test]
fn oracle_cap() {
    let w = Work::new();
    let rows: String = (0..5).map(|k| format!("{k}\n")).collect();
    w.file("m.csv", &format!("x\n{rows}"));
    let o = w.run(&["oracle", "m.csv", "m.csv", "--cap", "4"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn exit_codes() {
    let w = Work::new();
    w.file("bad.csv", "x,w\n1,abc\n");
    w.file("E.json", r#"{"kind":"exponential","rate":1}"#);
    w.file("N.json", r#"{"kind":"normal","mean":0,"stddev":1}"#);
    let cases: [(&[&str], i32); 6] = [
        (&["compute", "bad.csv", "F.csv"], 2),
        (&["compute", "F.csv", "missing.csv"], 2),
        (&["compute", "F.csv"], 2),
        (&["compute", "--p", "0.5", "F.csv", "G.csv"], 2),
        (&["compute", "--p", "200", "E.json", "E.json"], 3),
        (
            &["compute", "--p", "2", "N.json", "U1.json", "--grid", "adaptive:1e-300"],
            4,
        ),
    ];
    for (args, expected) in cases {
        let o = w.run(args);
        assert_eq!(code(&o), expected, "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error"), "{args:?}");
    }
    let o = w.run(&["frobnicate"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn ranked_copula_input() {
    let w = Work::new();
    w.file("raw.csv", "a,b\n10,-3\n20,-1\n");
    let auto = json(&w.run(&[
        "compute",
        "--p",
        "2",
        "--copula",
        "raw.csv",
        "--ranks",
        "auto",
        "--margins-f",
        "F.csv,F.csv",
        "--margins-g",
        "G.csv,G.csv",
    ]));
    assert_eq!(auto["power_value"], 3.0);
    let raw = w.run(&[
        "compute",
        "--p",
        "2",
        "--copula",
        "raw.csv",
        "--margins-f",
        "F.csv,F.csv",
        "--margins-g",
        "G.csv,G.csv",
    ]);
    assert_eq!(code(&raw), 2);
}
