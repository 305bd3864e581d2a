use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cannon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cannon"))
        .args(args)
        .output()
        .expect("run cannon")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

/// Runs a generating command and saves its output under `dir`.
fn save(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let o = cannon(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    let p = dir.join(name);
    std::fs::write(&p, &o.stdout).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn decimal_572() {
    let dir = TempDir::new().unwrap();
    let z = save(dir.path(), "z.json", &["gen", "z-decimal"]);
    assert_eq!(stdout(&cannon(&["validate", s(&z)])), "valid");
    let o = cannon(&["reduce", s(&z), "--repeat", "1:572"]);
    assert_eq!(stdout(&o), "t.t.1.1.1.1.1.t-.1.1.1.1.1.1.1.t-.1.1");
    let o = cannon(&["accepts", s(&z), "--repeat", "1:572", "--repeat", "-1:572"]);
    assert!(o.status.success());
    let o = cannon(&["accepts", s(&z), "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn trace_json_shrinks() {
    let dir = TempDir::new().unwrap();
    let z = save(dir.path(), "z.json", &["gen", "z-decimal"]);
    let o = cannon(&["--json", "trace", s(&z), "--repeat", "1:40"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let words = v["words"].as_array().unwrap();
    assert!(words.len() > 1);
    let lens: Vec<usize> = words.iter().map(|w| w.as_str().unwrap().split('.').count()).collect();
    assert!(lens.windows(2).all(|p| p[1] < p[0]), "{lens:?}");
}

#[test]
fn errors_and_usage() {
    let dir = TempDir::new().unwrap();
    let f = save(dir.path(), "f.json", &["gen", "free-group"]);
    assert!(cannon(&["accepts", s(&f), "a.b.B.A"]).status.success());
    let o = cannon(&["--json", "reduce", s(&f), "q"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["error"], "unknown-letter");
    assert_eq!(cannon(&["no-such-command"]).status.code(), Some(2));
    let o = cannon(&["reduce", s(&dir.path().join("missing.json")), "a"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn compress_and_convert_agree_with_the_base() {
    let dir = TempDir::new().unwrap();
    let f = save(dir.path(), "f.json", &["gen", "free-group"]);
    let c = save(dir.path(), "c.json", &["compress", s(&f), "--n", "2"]);
    let sc = save(dir.path(), "sc.json", &["compress", s(&f), "--n", "2", "--strict"]);
    let ni = save(dir.path(), "ni.json", &["convert", "to-non-incremental", s(&f)]);
    let t = save(dir.path(), "t.json", &["compress", s(&f), "--n", "2", "--table"]);
    for p in [&c, &sc, &ni, &t] {
        assert_eq!(stdout(&cannon(&["validate", s(p)])), "valid");
    }
    for w in ["a.b.B.A", "a.a.B.b.A", "b.a.A.B.b"] {
        let want = cannon(&["accepts", s(&f), w]).status.code();
        for p in [&c, &sc, &ni] {
            assert_eq!(cannon(&["accepts", s(p), w]).status.code(), want, "{w} on {p:?}");
        }
    }
}

#[test]
fn dihedral_and_heisenberg_recipes() {
    let dir = TempDir::new().unwrap();
    let z = save(dir.path(), "z.json", &["gen", "z-decimal"]);
    let d = save(dir.path(), "d.json", &["combine", "finite-index", "--group", "dihedral", s(&z)]);
    let o = cannon(&["--json", "validate", s(&d)]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "dihedral");
    let h = save(dir.path(), "h.json", &["gen", "heisenberg"]);
    assert_eq!(stdout(&cannon(&["validate", s(&h)])), "valid");
}

#[test]
fn free_product_of_free_groups() {
    let dir = TempDir::new().unwrap();
    let f = save(dir.path(), "f.json", &["gen", "free-group", "--rank", "1"]);
    let o = cannon(&["combine", "free-product", s(&f), s(&f)]);
    // Both factors use the letters a, A.
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn surface_group_accepts_its_relator() {
    let dir = TempDir::new().unwrap();
    let g = save(dir.path(), "g.json", &["gen", "surface-octagon"]);
    assert!(cannon(&["accepts", s(&g), "a.b.A.B.c.d.C.D"]).status.success());
    assert!(cannon(&["accepts", s(&g), "b.A.B.c.d.C.D.a"]).status.success());
    assert_eq!(cannon(&["accepts", s(&g), "a.b.A.B"]).status.code(), Some(1));
}

#[test]
fn diagram_outputs() {
    let dir = TempDir::new().unwrap();
    let f = save(dir.path(), "f.json", &["gen", "free-group"]);
    let o = cannon(&["diagram", s(&f), "a.b.B.A.a", "--boundaries", "2"]);
    let text = stdout(&o);
    assert!(text.contains('#') && text.contains('|'), "{text}");
    let o = cannon(&["diagram", s(&f), "a.b.B.A.a", "--svg", "--path", "0"]);
    assert!(stdout(&o).starts_with("<svg"));
}

#[test]
fn breaker_on_the_naive_candidate() {
    let dir = TempDir::new().unwrap();
    let n = save(dir.path(), "n.json", &["gen", "f2xz-naive"]);
    let args = ["--json", "breaker", "--group", "f2xz", "--candidate", s(&n), "--n1", "2", "--n2", "2"];
    let v: Value = serde_json::from_str(&stdout(&cannon(&args))).unwrap();
    assert_eq!(v["pairs_total"], 36);
    assert!(v["outcome"]["kind"].is_string());
    let o = cannon(&["--json", "breaker", "--group", "f2xz", "--candidate", s(&n), "--n1", "2", "--n2", "2", "--budget", "3"]);
    assert_eq!(o.status.code(), Some(1));
}

const MACHINE: &str = r#"{
  "flavor": "incremental",
  "input_alphabet": ["a", "A"],
  "working_alphabet": ["a", "A"],
  "states": [
    {"name": "q", "default": "q", "rules": [
      {"lhs": ["a", "A"], "rhs": []},
      {"lhs": ["A", "a"], "rhs": []}
    ]}
  ]
}"#;

#[test]
fn machine_and_its_mimic_agree() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, MACHINE).unwrap();
    let sys = save(dir.path(), "s.json", &["machine", "mimic", s(&m)]);
    assert_eq!(stdout(&cannon(&["validate", s(&sys)])), "valid");
    for w in ["a.A.a", "a.a.A.A", "A.a.a.a.A"] {
        let o = cannon(&["--json", "machine", "run", s(&m), w]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        let reduced = stdout(&cannon(&["reduce", s(&sys), w]));
        assert_eq!(v["word"].as_str().unwrap(), reduced, "{w}");
    }
}

#[test]
fn selftest_subset() {
    let o = cannon(&["selftest", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("PASS"));
}
