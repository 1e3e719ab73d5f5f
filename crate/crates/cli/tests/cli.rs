use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const K4: &str = "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cqcount"));
    c.env_remove("CQCOUNT_LIMITS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Generates an instance with `gen` and returns (query, db) paths.
fn gen(dir: &Path, args: &[&str]) -> (PathBuf, PathBuf) {
    let out_dir = dir.join(format!("inst{}", fs::read_dir(dir).unwrap().count()));
    let mut all: Vec<&str> = vec!["gen"];
    all.extend_from_slice(args);
    all.extend(["--out-dir", s(&out_dir)]);
    let doc = json(&run(&all));
    (
        PathBuf::from(doc["query"].as_str().unwrap()),
        PathBuf::from(doc["db"].as_str().unwrap()),
    )
}

fn count(q: &Path, d: &Path, extra: &[&str]) -> Output {
    let mut all = vec!["count", "--query", s(q), "--db", s(d)];
    all.extend_from_slice(extra);
    run(&all)
}

/// Structural check of a run report: only known keys, and exactly one of
/// count/estimate depending on the method.
fn check_report(r: &Value) {
    let obj = r.as_object().unwrap();
    for k in obj.keys() {
        assert!(
            ["method", "query", "database", "count", "estimate", "approx", "widths", "duration_ms"].contains(&k.as_str()),
            "unexpected key {k}"
        );
    }
    let approximate = r["method"] == "fptras";
    assert_eq!(obj.contains_key("estimate"), approximate);
    assert_eq!(obj.contains_key("count"), !approximate);
    assert_eq!(obj.contains_key("approx"), approximate);
    assert!(r["duration_ms"].as_f64().unwrap() >= 0.0);
    if approximate {
        assert!(r["estimate"].is_u64());
        for k in ["epsilon", "delta", "seed"] {
            assert!(!r["approx"][k].is_null(), "{k} echoed");
        }
    } else {
        assert!(r["count"].is_u64());
    }
}

#[test]
fn exact_count_of_hampath_k4() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "k4.txt", K4);
    let (q, d) = gen(dir.path(), &["hampath", "--graph", s(&g), "--n", "4"]);
    let r = json(&count(&q, &d, &["--method", "exact"]));
    check_report(&r);
    assert_eq!(r["count"], 24);
}

#[test]
fn lihom_edge_edge_counts_two() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "edge.txt", "0 1\n");
    let (q, d) = gen(dir.path(), &["lihom", "--pattern", s(&e), "--target", s(&e)]);
    assert_eq!(json(&count(&q, &d, &[]))["count"], 2);
}

#[test]
fn fptras_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let p = write(dir.path(), "star.txt", "0 1\n0 2\n");
    let t = write(dir.path(), "tri.txt", "0 1\n1 2\n2 0\n");
    let (q, d) = gen(dir.path(), &["lihom", "--pattern", s(&p), "--target", s(&t)]);
    let args = ["--method", "fptras", "--epsilon", "0.25", "--delta", "0.1", "--seed", "42"];
    let mut a = json(&count(&q, &d, &args));
    let mut b = json(&count(&q, &d, &args));
    check_report(&a);
    a.as_object_mut().unwrap().remove("duration_ms");
    b.as_object_mut().unwrap().remove("duration_ms");
    assert_eq!(a, b);
    let est = a["estimate"].as_f64().unwrap();
    assert!((est - 6.0).abs() <= 0.25 * 6.0, "estimate {est}");
    assert_eq!(a["approx"]["seed"], 42);
    assert_eq!(a["approx"]["hom_backend"], "td-dp");

    let bf = json(&count(&q, &d, &["--method", "fptras", "--seed", "42", "--hom-backend", "bruteforce"]));
    assert_eq!(bf["approx"]["hom_backend"], "bruteforce");
}

#[test]
fn exact_and_fhw_agree_on_plain_queries() {
    let dir = TempDir::new().unwrap();
    for seed in 0..8 {
        let seed = seed.to_string();
        let (q, d) = gen(
            dir.path(),
            &["random", "--seed", &seed, "--vars", "4", "--atoms", "3", "--p-neg", "0", "--p-diseq", "0"],
        );
        let exact = json(&count(&q, &d, &["--method", "exact"]));
        let fhw = json(&count(&q, &d, &["--method", "fhw"]));
        check_report(&fhw);
        assert_eq!(exact["count"], fhw["count"], "seed {seed}");
        assert!(fhw["widths"]["fhw"].is_string());
    }
}

#[test]
fn fhw_method_rejects_negation() {
    let dir = TempDir::new().unwrap();
    let q = write(dir.path(), "q.cq", "q(x) :- R(x, y), !S(y)\n");
    let d = write(
        dir.path(),
        "d.json",
        r#"{"domain":[0,1],"relations":{"R":{"arity":2,"tuples":[[0,1]]},"S":{"arity":1,"tuples":[]}}}"#,
    );
    let out = count(&q, &d, &["--method", "fhw"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&count(&q, &d, &["--method", "exact"]))["count"], 1);
}

#[test]
fn analyze_widths() {
    let dir = TempDir::new().unwrap();
    let g = write(dir.path(), "k4.txt", K4);
    let (q, _) = gen(dir.path(), &["hampath", "--graph", s(&g)]);
    let r = json(&run(&["analyze", "--query", s(&q), "--measures", "tw"]));
    assert_eq!(r["measures"]["tw"]["value"], "1");
    assert_eq!(r["measures"]["tw"]["exact"], true);
    assert!(r["measures"].get("fhw").is_none());

    let tri = write(dir.path(), "tri.cq", "q(x, y, z) :- E(x, y), E(y, z), E(z, x)\n");
    let r = json(&run(&["analyze", "--query", s(&tri), "--measures", "fhw,rho"]));
    assert_eq!(r["measures"]["fhw"]["value"], "3/2");
    assert_eq!(r["measures"]["rho"]["value"], "3/2");
    assert!(r["measures"]["fhw"]["decomposition"]["nodes"].is_array());

    let all = json(&run(&["analyze", "--query", s(&tri)]));
    let keys: Vec<&String> = all["measures"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["fhw", "rho", "tw"]);
}

#[test]
fn random_generation_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let args = ["random", "--seed", "7", "--vars", "5", "--atoms", "4"];
    let (q1, d1) = gen(dir.path(), &args);
    let (q2, d2) = gen(dir.path(), &args);
    assert_ne!(q1, q2);
    assert_eq!(fs::read(&q1).unwrap(), fs::read(&q2).unwrap());
    assert_eq!(fs::read(&d1).unwrap(), fs::read(&d2).unwrap());
}

#[test]
fn text_output() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "edge.txt", "0 1\n");
    let (q, d) = gen(dir.path(), &["lihom", "--pattern", s(&e), "--target", s(&e)]);
    let out = count(&q, &d, &["--out", "text"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("count: 2"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let good_q = write(dir.path(), "q.cq", "q(x) :- R(x, y)\n");
    let good_d = write(
        dir.path(),
        "d.json",
        r#"{"domain":[0,1,2],"relations":{"R":{"arity":2,"tuples":[[0,1],[1,2],[2,0]]}}}"#,
    );
    assert_eq!(count(&good_q, &good_d, &[]).status.code(), Some(0));

    let cases: Vec<(&str, PathBuf, PathBuf, Vec<&str>, i32)> = vec![
        ("malformed query", write(dir.path(), "bad.cq", "q(x) :- R(x,\n"), good_d.clone(), vec![], 2),
        ("malformed database", good_q.clone(), write(dir.path(), "bad.json", "{ not json"), vec![], 2),
        ("missing file", dir.path().join("absent.cq"), good_d.clone(), vec![], 2),
        (
            "arity mismatch",
            write(dir.path(), "ar.cq", "q(x) :- R(x, y, y)\n"),
            good_d.clone(),
            vec![],
            3,
        ),
        (
            "missing relation",
            write(dir.path(), "mr.cq", "q(x) :- S(x)\n"),
            good_d.clone(),
            vec![],
            3,
        ),
        ("no seed", good_q.clone(), good_d.clone(), vec!["--method", "fptras"], 3),
        (
            "epsilon out of range",
            good_q.clone(),
            good_d.clone(),
            vec!["--method", "fptras", "--seed", "1", "--epsilon", "1.5"],
            3,
        ),
        ("brute-force budget", good_q.clone(), good_d.clone(), vec!["--brute-force-limit", "2"], 4),
        ("bag budget", good_q.clone(), good_d.clone(), vec!["--method", "fhw", "--max-bag-solutions", "1"], 4),
    ];
    for (name, q, d, extra, code) in cases {
        let out = count(&q, &d, &extra);
        assert_eq!(out.status.code(), Some(code), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty(), "{name}: nothing on stdout");
    }
    let out = run(&["analyze", "--query", s(&good_q), "--measures", "hw"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["gen", "random", "--seed", "1", "--vars", "0", "--out-dir", s(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn limits_file_from_environment() {
    let dir = TempDir::new().unwrap();
    let q = write(dir.path(), "q.cq", "q(x) :- R(x, y)\n");
    let d = write(
        dir.path(),
        "d.json",
        r#"{"domain":[0,1,2],"relations":{"R":{"arity":2,"tuples":[[0,1]]}}}"#,
    );
    let limits = write(dir.path(), "limits.json", r#"{"brute_force": 2}"#);
    let out = bin()
        .env("CQCOUNT_LIMITS", &limits)
        .args(["count", "--query", s(&q), "--db", s(&d)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    // flags override the file
    let out = bin()
        .env("CQCOUNT_LIMITS", &limits)
        .args(["count", "--query", s(&q), "--db", s(&d), "--brute-force-limit", "100"])
        .output()
        .unwrap();
    assert_eq!(json(&out)["count"], 1);
}
