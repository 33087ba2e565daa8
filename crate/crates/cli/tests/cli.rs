use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use charmat_core::charmat::{omega0, NumericWeyl, WeylSource};
use charmat_core::{builtins, Engine, Tolerances, C64};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_charmat"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg(cmd).arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: PathBuf) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

const SL: &str = r#"{"system": {"builtin": "sl-dirichlet"}, "lambda": {"list": [[0, 1], [0, 2], [1, 1]]}}"#;

#[test]
fn verify_on_sturm_liouville_passes_with_named_checks() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "sl.json", SL);
    let out = run("verify", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(dir.path().join("verify.json"));
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() >= 12);
    assert!(checks.iter().all(|c| c["status"] != "fail"));
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["tolerances"]["route"].as_f64(), Some(1e-7));
    assert!(report["tolerances"]["eig"].is_number());
}

#[test]
fn zero_parameter_gives_the_unperturbed_matrix() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "zero.json",
        r#"{"system": {"builtin": "sl"}, "tau": {"kind": "zero"}, "lambda": {"list": [[0, 1], [0.5, 2], [-1, -1]]},
            "routes": ["correction"]}"#,
    );
    let out = run("charmat", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(dir.path().join("charmat_correction.csv"));
    assert!(header.starts_with("# lambda_re,lambda_im,Omega_re_0_0,Omega_im_0_0,Omega_re_0_1"));
    let sys = builtins::sturm_liouville_unit();
    let panels = builtins::default_panels(&sys);
    let num = NumericWeyl::new(std::sync::Arc::new(Engine::new(sys, panels, Tolerances::default())));
    for row in rows {
        let lambda = C64::new(row[0], row[1]);
        let expect = omega0(&num.weyl_matrix(lambda).unwrap());
        let n = expect.nrows();
        for j in 0..n {
            for k in 0..n {
                let got = C64::new(row[2 + 2 * (j * n + k)], row[3 + 2 * (j * n + k)]);
                assert!((got - expect[(j, k)]).norm() <= 1e-12, "λ = {lambda}, entry ({j}, {k})");
            }
        }
    }
}

#[test]
fn malformed_parameter_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [
        ("kind.json", r#"{"system": {"builtin": "sl"}, "tau": {"kind": "nonsense"}, "lambda": {"list": [[0, 1]]}}"#),
        ("shape.json", r#"{"system": {"builtin": "sl"}, "tau": {"kind": "self-adjoint", "c0": [[1]], "c1": [[0]]}, "lambda": {"list": [[0, 1]]}}"#),
        ("syntax.json", r#"{"system": {"builtin": "sl"}, "tau": {"kind": "#),
    ] {
        let cfg = write_config(dir.path(), name, text);
        let out = run("charmat", &cfg, dir.path(), &[]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("config"), "{name}");
    }
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.json",
        r#"{"system": {"builtin": "free3"}, "tau": {"kind": "random-dissipative"},
            "lambda": {"rect": {"re": [-1, 1], "im": [0.5, 1.5], "counts": [3, 2]}}, "seed": 11}"#,
    );
    for cmd in ["weyl", "charmat", "resolve"] {
        let a = dir.path().join(format!("{cmd}-1"));
        let b = dir.path().join(format!("{cmd}-4"));
        assert_eq!(run(cmd, &cfg, &a, &["--workers", "1"]).status.code(), Some(0), "{cmd}");
        assert_eq!(run(cmd, &cfg, &b, &["--workers", "4"]).status.code(), Some(0), "{cmd}");
        let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for n in names {
            assert_eq!(std::fs::read(a.join(&n)).unwrap(), std::fs::read(b.join(&n)).unwrap(), "{cmd}: {n:?}");
        }
    }
}

#[test]
fn eigenvalues_of_the_dirichlet_problem() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "eig.json",
        r#"{"system": {"builtin": "sl"}, "lambda": {"list": [[0, 1]]}, "eig": {"lo": 1, "hi": 100, "grid": 150}}"#,
    );
    assert_eq!(run("eig", &cfg, dir.path(), &[]).status.code(), Some(0));
    let report = read_json(dir.path().join("eig.json"));
    let values: Vec<f64> = report["eigenvalues"].as_array().unwrap().iter().map(|v| v["value"].as_f64().unwrap()).collect();
    assert_eq!(values.len(), 3);
    for (k, v) in values.iter().enumerate() {
        let exact = ((k + 1) as f64 * std::f64::consts::PI).powi(2);
        assert!((v - exact).abs() <= 1e-8 * exact, "{v} vs {exact}");
    }
}

#[test]
fn resolvent_routes_agree_through_the_cli() {
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for route in ["bvp", "kernel", "krein"] {
        let cfg = write_config(
            dir.path(),
            &format!("{route}.json"),
            &format!(
                r#"{{"system": {{"builtin": "sl-variable"}}, "tau": {{"kind": "linear"}}, "lambda": {{"list": [[0, 1], [2, -1]]}},
                    "resolve": {{"route": "{route}", "f": {{"constant": [1, [0, 1]]}}}}}}"#
            ),
        );
        let out_dir = dir.path().join(route);
        let out = run("resolve", &cfg, &out_dir, &[]);
        assert_eq!(out.status.code(), Some(0), "{route}: {}", String::from_utf8_lossy(&out.stderr));
        outputs.push(csv_rows(out_dir.join("resolve.csv")).1);
    }
    let scale = outputs[0].iter().flat_map(|r| r[3..].iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    for other in &outputs[1..] {
        for (a, b) in outputs[0].iter().zip(other) {
            assert_eq!(a[..3], b[..3]);
            for (x, y) in a[3..].iter().zip(&b[3..]) {
                assert!((x - y).abs() <= 1e-6 * scale);
            }
        }
    }
}

#[test]
fn numeric_failures_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "sl.json", SL);
    let out = run("charmat", &cfg, dir.path(), &["--tol-override", "route=1e-300"]);
    assert_eq!(out.status.code(), Some(1));
    let report = read_json(dir.path().join("charmat.json"));
    assert_eq!(report["route_agreement"]["passed"], Value::Bool(false));
    assert_eq!(report["tolerances"]["route"].as_f64(), Some(1e-300));
}

#[test]
fn bad_flags_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "sl.json", SL);
    assert_eq!(run("verify", &cfg, dir.path(), &["--tol-override", "nonsense=1"]).status.code(), Some(2));
    assert_eq!(run("verify", &cfg, dir.path(), &["--tol-override", "route"]).status.code(), Some(2));
    assert_eq!(run("verify", &cfg, dir.path(), &["--workers", "0"]).status.code(), Some(2));
    assert_eq!(run("eig", &cfg, dir.path(), &[]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(run("weyl", &missing, dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn tabulated_system_matches_builtin() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "tables.json",
        r#"{"system": {"dim_h": 1, "interval": [0, 1],
                       "b": {"constant": [[0, 0], [0, 1]]},
                       "delta": {"table": {"t": [0, 1], "values": [[[1, 0], [0, 0]], [[1, 0], [0, 0]]]}}},
            "lambda": {"list": [[0, 1], [3, 2]]}}"#,
    );
    let builtin = write_config(dir.path(), "builtin.json", r#"{"system": {"builtin": "sl"}, "lambda": {"list": [[0, 1], [3, 2]]}}"#);
    assert_eq!(run("weyl", &cfg, &dir.path().join("t"), &[]).status.code(), Some(0));
    assert_eq!(run("weyl", &builtin, &dir.path().join("b"), &[]).status.code(), Some(0));
    let (_, a) = csv_rows(dir.path().join("t/weyl.csv"));
    let (_, b) = csv_rows(dir.path().join("b/weyl.csv"));
    for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
        assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
    }
}
