use std::process::{Command, Output};

use serde_json::Value;

fn eoalab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eoalab"))
        .args(args)
        .env_remove("EOALAB_MEM_CAP_MB")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = eoalab(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn h2(p: f64) -> f64 {
    [p, 1.0 - p].iter().filter(|&&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

#[test]
fn wstate_example() {
    let v = json(&["example", "wstate", "--json"]);
    // Wootters on W^{AB}: concurrence 2/3
    let c: f64 = 2.0 / 3.0;
    let eof = h2((1.0 + (1.0 - c * c).sqrt()) / 2.0);
    let upper = h2(1.0 / 3.0);
    let want = [
        ("upper_bound", upper),
        ("eof", eof),
        ("ghz_rate", upper - eof),
        ("combined_ghz", upper - eof / 2.0),
    ];
    for (k, x) in want {
        assert!((v[k].as_f64().unwrap() - x).abs() < 1e-12, "{k}");
    }
    assert!((v["upper_bound"].as_f64().unwrap() - 0.91830).abs() < 1e-5);
    assert!((v["combined_ghz"].as_f64().unwrap() - 0.64327).abs() < 1e-5);
}

#[test]
fn aharonov2_example_is_verbatim() {
    let out = eoalab(&["example", "aharonov2"]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().trim(),
        r#"{"schmidt":[0.25,0.25,0.125,0.125,0.125,0.125],"entropy":2.5}"#
    );
}

#[test]
fn aharonov_single_copy_example() {
    let v = json(&["example", "aharonov"]);
    let lo = v["lower_bound"].as_f64().unwrap();
    assert!((0.999..=1.0 + 1e-9).contains(&lo), "{lo}");
    assert!((v["upper_bound"].as_f64().unwrap() - 3f64.log2()).abs() < 1e-9);
}

#[test]
fn upsilon_example_rows() {
    let v = json(&["example", "upsilon"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    for r in rows {
        let a2 = r["alpha2"].as_f64().unwrap();
        let f = h2(0.5 - (a2 * (1.0 - a2)).sqrt());
        assert!((r["eof_bc"].as_f64().unwrap() - f).abs() < 1e-6);
        assert!((r["oneway_bound_helper_a"].as_f64().unwrap() - (1.0 - f)).abs() < 1e-6);
    }
}

#[test]
fn ghz_and_lost_found_examples() {
    let g = json(&["example", "ghz"]);
    assert!((g["min_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((g["mincut_ghz4"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let l = json(&["example", "lost-found"]);
    let caps: Vec<f64> = l["channels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["capacity"].as_f64().unwrap())
        .collect();
    assert!((caps[0] - 1.0).abs() < 1e-6);
    assert!((caps[1] - 3f64.log2()).abs() < 1e-6);
    assert!((caps[2] - 1.0).abs() < 1e-6);
}

#[test]
fn depolarizing_capacity() {
    let v = json(&["capacity", "--channel", "builtin:depolarizing:1.0"]);
    assert!((v["capacity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(eoalab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(eoalab(&["entropy", "--state", "w", "--nope"]).status.code(), Some(2));
    assert_eq!(eoalab(&["entropy", "--state", "builtin:unknown"]).status.code(), Some(2));
    assert_eq!(eoalab(&["mincut", "--state", "w", "--a", "Z"]).status.code(), Some(2));
    assert_eq!(eoalab(&["entropy", "--state", "/no/such/file.json"]).status.code(), Some(2));
}

#[test]
fn stochastic_commands_require_a_seed() {
    for args in [
        &["distill", "--state", "w", "--n", "2", "--trials", "2"][..],
        &["eoa-opt", "--state", "aharonov"][..],
        &["fit-mixture", "--channel", "identity:2"][..],
        &["coding-demo", "--channel", "identity:2"][..],
    ] {
        let out = eoalab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
    }
}

#[test]
fn resource_caps_exit_three() {
    let big = eoalab(&["distill", "--state", "ghz:3", "--n", "40", "--trials", "1", "--seed", "1"]);
    assert_eq!(big.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_eoalab"))
        .args(["distill", "--state", "w", "--n", "6", "--trials", "1", "--seed", "1"])
        .env("EOALAB_MEM_CAP_MB", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn same_seed_same_bytes() {
    let args = ["distill", "--state", "upsilon:0.3", "--a", "B", "--b", "C", "--helper", "A", "--n", "3"];
    let run = |seed: &str, extra: &[&str]| {
        let mut a = args.to_vec();
        a.extend_from_slice(&["--trials", "8", "--seed", seed]);
        a.extend_from_slice(extra);
        let out = eoalab(&a);
        assert!(out.status.success());
        out.stdout
    };
    let first = run("7", &[]);
    assert_eq!(first, run("7", &[]));
    assert_eq!(first, run("7", &["--parallel", "2"]));
    assert_ne!(first, run("8", &[]));
}

#[test]
fn csv_and_json_agree() {
    let base = ["ghz", "--state", "w", "--n", "2", "--trials", "4", "--seed", "3", "--summary"];
    let v = json(&base);
    let mut csv_args = base.to_vec();
    csv_args.extend_from_slice(&["--format", "csv"]);
    let out = eoalab(&csv_args);
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut seen = 0;
    for line in csv.lines().skip(1) {
        let (k, x) = line.split_once(',').unwrap();
        let ptr = format!("/{}", k.replace('.', "/"));
        let j = v.pointer(&ptr).unwrap_or_else(|| panic!("{k}"));
        if let Some(f) = j.as_f64() {
            let c: f64 = x.parse().unwrap();
            assert_eq!(c.to_bits(), f.to_bits(), "{k}");
            seen += 1;
        }
    }
    assert!(seen > 5);
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("eoalab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("w.json");
    let p = path.to_str().unwrap();
    let out = eoalab(&["example", "wstate", "--output", p]);
    assert!(out.status.success() && out.stdout.is_empty());
    let direct = eoalab(&["example", "wstate"]).stdout;
    assert_eq!(std::fs::read(&path).unwrap(), direct);
    std::fs::remove_dir_all(&dir).unwrap();
}
