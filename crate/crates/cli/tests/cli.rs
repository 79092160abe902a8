use std::path::Path;
use std::process::{Command, Output};

fn rangeperc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rangeperc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const CPDR: &str = r#"{
    "model": "cpdr", "runs": 50, "master_seed": 11,
    "params": {"dimension": 1, "lambda": 0.0, "dist": {"kind": "constant", "k": 1},
               "window_radius": 10, "horizon": 5.0}
}"#;

#[test]
fn cpdr_lambda_zero_never_survives() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CPDR);
    let out = dir.path().join("out");
    let o = rangeperc(&["cpdr", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().nth(1).unwrap().split(',').nth(2).unwrap(), "0");
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 51);
    assert!(runs.lines().skip(1).all(|l| l.contains(",extinct,")));
}

#[test]
fn worker_count_does_not_change_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.json",
        r#"{"model": "oned_p1", "runs": 40, "master_seed": 5,
            "params": {"dist": {"kind": "betaexp", "beta": 2.0}, "step_cap": 100000, "reach_target": 5000},
            "sweep": {"param": "dist.beta", "values": [0.5, 2.0]}}"#,
    );
    let mut seen = Vec::new();
    for w in ["1", "8"] {
        let out = dir.path().join(format!("w{w}"));
        let o = rangeperc(&["oned", "--config", &cfg, "--out", out.to_str().unwrap(), "--workers", w]);
        assert!(o.status.success());
        seen.push(std::fs::read(out.join("runs.csv")).unwrap());
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CPDR);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    rangeperc(&["cpdr", "--config", &cfg, "--out", a.to_str().unwrap(), "--seed", "11"]);
    rangeperc(&["cpdr", "--config", &cfg, "--out", b.to_str().unwrap(), "--seed", "12"]);
    let ra = std::fs::read_to_string(a.join("runs.csv")).unwrap();
    let rb = std::fs::read_to_string(b.join("runs.csv")).unwrap();
    assert_ne!(ra, rb);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &CPDR.replace("\"runs\": 50", "\"runs\": 0"));
    let o = rangeperc(&["cpdr", "--config", &bad, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let good = write(dir.path(), "good.json", CPDR);
    let o = rangeperc(&["aprr", "--config", &good, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "model/subcommand mismatch");

    let missing = dir.path().join("missing.json");
    let o = rangeperc(&["cpdr", "--config", missing.to_str().unwrap(), "--out", "x"]);
    assert_eq!(o.status.code(), Some(3));

    // An output path that is a regular file cannot become a directory.
    let blocker = write(dir.path(), "blocker", "");
    let o = rangeperc(&["cpdr", "--config", &good, "--out", &blocker]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bounds_json_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.json",
        r#"{"dist": {"kind": "constant", "k": 1}, "dimension": 1, "lambdas": [0.1], "block_sizes": [1]}"#,
    );
    let o = rangeperc(&["bounds", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.starts_with("name"));
    assert!(table.contains("lambda0_bound"));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bounds.json")).unwrap()).unwrap();
    let reports = json.as_array().unwrap();
    let lambda0 = reports.iter().find(|r| r["name"] == "lambda0_bound").unwrap();
    assert!((lambda0["value"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);
    let bm = reports.iter().find(|r| r["name"] == "branching_mean").unwrap();
    assert!((bm["value"].as_f64().unwrap() - 0.6).abs() < 1e-12);

    let heavy = write(dir.path(), "h.json", r#"{"dist": {"kind": "betaexp", "beta": 1.0}, "dimension": 1}"#);
    let o = rangeperc(&["bounds", "--config", &heavy, "--format", "json"]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json[1]["value"], serde_json::Value::Null);
    assert_eq!(json[1]["finite"], false);
}
