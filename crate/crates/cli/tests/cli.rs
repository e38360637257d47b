use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bellkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellkit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let o = bellkit(&all);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn local_bounds_of_named_functionals() {
    for (name, want) in [("chsh", 2.0), ("chsh_prime", 2.0), ("m3322", 6.0), ("m4322", 7.0), ("elegant", 6.0)] {
        let v = json(&["bound", "--name", name]);
        assert_eq!(v["value"].as_f64().unwrap(), want, "{name}");
        assert_eq!(v["witness"]["kind"], "deterministic");
    }
    let v = json(&["bound", "--name", "tilted", "--tau", "1.25"]);
    assert!((v["value"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    let o = bellkit(&["bound", "--name", "chsh", "--kind", "algebraic"]);
    assert_eq!(stdout(&o).trim(), "algebraic bound of chsh: 4");
}

#[test]
fn significant_digits_flag() {
    let o = bellkit(&["qmax", "--name", "chsh", "--restarts", "2", "--digits", "3"]);
    assert!(stdout(&o).starts_with("qubit value of chsh: 2.83\n"), "{}", stdout(&o));
}

#[test]
fn qmax_reports_a_reusable_strategy() {
    let v = json(&["qmax", "--name", "chsh", "--restarts", "4", "--seed", "3"]);
    assert!((v["value"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    let st: bellkit::quantum::Strategy = serde_json::from_value(v["strategy"].clone()).unwrap();
    let b = bellkit::quantum::behavior_of(&st);
    let s = bellkit::functionals::evaluate(&bellkit::functionals::chsh(), &b).unwrap();
    assert!((s - v["value"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| bellkit(args).status.code().unwrap();
    assert_eq!(code(&["bound", "--name", "nope"]), 2);
    assert_eq!(code(&["bound"]), 2);
    assert_eq!(code(&["bogus"]), 2);
    assert_eq!(code(&["bound", "--name", "tilted", "--tau", "1.7"]), 3);
    assert_eq!(code(&["bound", "--name", "chained", "--n", "1"]), 3);
    assert_eq!(code(&["epr2", "--preset", "chained", "--n", "9"]), 3);
    assert_eq!(code(&["epr2", "--behavior", "/no/such/file.json"]), 2);
}

#[test]
fn epr2_presets() {
    let q = |p: &str| json(&["epr2", "--preset", p])["q_min"].as_f64().unwrap();
    assert!((q("tsirelson") - (2f64.sqrt() - 1.0)).abs() < 1e-6);
    assert_eq!(q("pr-box"), 1.0);
    assert_eq!(q("uniform"), 0.0);
}

#[test]
fn behavior_and_functional_files() {
    let dir = tempfile::tempdir().unwrap();
    let b = bellkit::scenario::Behavior::pr_box();
    let bpath = dir.path().join("b.json");
    std::fs::write(&bpath, serde_json::to_string(&b).unwrap()).unwrap();
    let v = json(&["epr2", "--behavior", bpath.to_str().unwrap()]);
    assert_eq!(v["q_min"].as_f64().unwrap(), 1.0);

    let fpath = dir.path().join("f.json");
    std::fs::write(&fpath, serde_json::to_string(&bellkit::functionals::chsh()).unwrap()).unwrap();
    let v = json(&["bound", "--file", fpath.to_str().unwrap(), "--kind", "lplus1pr"]);
    assert_eq!(v["value"].as_f64().unwrap(), 4.0);

    let valid = r#"{"nA":1,"nB":1,"p":[[[[0.5]],[[0.0]]],[[[0.0]],[[0.5]]]]}"#;
    std::fs::write(&bpath, valid).unwrap();
    assert_eq!(bellkit(&["epr2", "--behavior", bpath.to_str().unwrap()]).status.code(), Some(0));
    std::fs::write(&bpath, r#"{"nA":1,"nB":1,"p":[[[[0.7]],[[0.0]]],[[[0.0]],[[0.5]]]]}"#).unwrap();
    assert_eq!(bellkit(&["epr2", "--behavior", bpath.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn chained_content_and_predictability() {
    let v = json(&["chained", "--value", "0.126"]);
    assert!((v["q_min"].as_f64().unwrap() - 0.874).abs() < 1e-12);
    assert!((v["predictability"]["baseline"].as_f64().unwrap() - 0.563).abs() < 1e-12);
    let rows = json(&["chained", "--table"]);
    assert_eq!(rows.as_array().unwrap().len(), 44);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"json": true, "digits": 3}"#).unwrap();
    let o = bellkit(&["--config", cfg.to_str().unwrap(), "bound", "--name", "chsh"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"], 2.0);
    std::fs::write(&cfg, r#"{"colour": 1}"#).unwrap();
    assert_eq!(bellkit(&["--config", cfg.to_str().unwrap(), "bound", "--name", "chsh"]).status.code(), Some(2));
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn simulate_writes_parseable_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = bellkit(&["simulate", "chained", "--nmax", "4", "--seed", "5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = read(&out, "chained.csv");
    assert_eq!(table.lines().next().unwrap(), "n,I_n,dI_n,nu_n,delta_n,q_min");
    assert_eq!(table.lines().count(), 4);
    for (k, n) in (2..=4).enumerate() {
        let counts = read(&out, &format!("chained_{k:03}_counts.csv"));
        let s = bellkit::scenario::Scenario::new(n, n).unwrap();
        let rec = bellkit::simulate::CountRecord::from_csv(s, 5, n as u64, &counts).unwrap();
        assert_eq!(rec.entries.len(), n * n);
        assert_eq!(rec.to_csv().unwrap(), counts);
        let side: Value = serde_json::from_str(&read(&out, &format!("chained_{k:03}.json"))).unwrap();
        assert!(side.is_object());
    }
    let again = tempfile::tempdir().unwrap();
    bellkit(&["simulate", "chained", "--nmax", "4", "--seed", "5", "--out", again.path().to_str().unwrap()]);
    assert_eq!(read(again.path(), "chained.csv"), table);
}

#[test]
fn simulate_rejects_bad_noise() {
    assert_eq!(bellkit(&["simulate", "elegant", "--visibility", "1.5"]).status.code(), Some(2));
    assert_eq!(bellkit(&["simulate", "tilted"]).status.code(), Some(2));
}

#[test]
fn report_is_deterministic_and_passes() {
    let a = bellkit(&["report", "--restarts", "4", "--seed", "1"]);
    let b = bellkit(&["report", "--restarts", "4", "--seed", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("q_min(n=18) computed ≥ 0.874"));
    assert!(text.contains("MES tilted τ=1.25: no violation found (d=2 search)"));
    assert!(text.contains("vs 2.817"));
    assert!(!text.contains('✗'), "{text}");
}
