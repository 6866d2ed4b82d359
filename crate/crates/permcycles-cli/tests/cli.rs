//! End-to-end checks of the binary: flag handling, output formats, exit
//! codes, and the documented determinism guarantees.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_permcycles"))
}

fn model(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name);
    p.to_str().expect("utf-8 path").to_string()
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("binary spawns");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout is utf-8")
}

fn exit_code(args: &[&str]) -> i32 {
    let out = bin().args(args).output().expect("binary spawns");
    out.status.code().expect("no signal")
}

#[test]
fn partition_row_names_the_quantity() {
    let out = run_ok(&["exact", "--model", &model("const11.json"), "--n", "3", "--what", "partition"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("quantity,value"));
    let row = lines.next().expect("data row");
    let (name, value) = row.split_once(',').expect("two columns");
    assert_eq!(name, "log_HN");
    let v: f64 = value.parse().expect("parseable float");
    assert!((v - 20.0f64.ln()).abs() < 1e-12);
    assert!(!out.contains('\r'), "LF endings only");
}

#[test]
fn marked_cycle_rows_at_two_points() {
    let out = run_ok(&["exact", "--model", &model("const11.json"), "--n", "2", "--what", "l1"]);
    let rows: Vec<(usize, f64)> = out
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').expect("two columns");
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].0, 1);
    assert!((rows[0].1 - 0.75).abs() < 1e-12);
    assert_eq!(rows[1].0, 2);
    assert!((rows[1].1 - 0.25).abs() < 1e-12);
}

#[test]
fn long_fraction_cutoff_zero_is_total_mass() {
    let out = run_ok(&[
        "exact",
        "--model",
        &model("superpolylog.json"),
        "--n",
        "5",
        "--what",
        "long-fraction",
        "--k",
        "0",
    ]);
    let row = out.lines().nth(1).expect("data row");
    let v: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-14);
}

#[test]
fn dumped_model_reparses_identically() {
    for name in ["const11.json", "superpolylog.json", "giant.json", "critpolylog.json"] {
        let dumped = run_ok(&["exact", "--model", &model(name), "--what", "partition", "--dump-model"]);
        let original = std::fs::read_to_string(model(name)).unwrap();
        let a: permcycles::WeightModel = serde_json::from_str(&dumped).unwrap();
        let b: permcycles::WeightModel = serde_json::from_str(&original).unwrap();
        assert_eq!(a, b, "round trip of {name}");

        // The dump is canonical: dumping what it emits reproduces it.
        let redumped = std::env::temp_dir().join(format!("permcycles-redump-{name}"));
        std::fs::write(&redumped, &dumped).unwrap();
        let twice = run_ok(&[
            "exact",
            "--model",
            redumped.to_str().unwrap(),
            "--what",
            "partition",
            "--dump-model",
        ]);
        assert_eq!(dumped, twice, "canonical fixed point for {name}");
    }
}

#[test]
fn repeated_seed_gives_identical_bytes() {
    let args = [
        "sample",
        "--model",
        &model("superpolylog.json"),
        "--n",
        "6",
        "--samples",
        "40",
        "--seed",
        "31337",
    ];
    let first = bin().args(args).output().expect("spawn");
    let second = bin().args(args).output().expect("spawn");
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stderr, second.stderr);

    // Every sampled type partitions all six points.
    for row in String::from_utf8(first.stdout).unwrap().lines().skip(1) {
        let total: usize = row.split(',').map(|p| p.parse::<usize>().unwrap()).sum();
        assert_eq!(total, 6);
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&first.stderr).expect("summary JSON on stderr");
    assert_eq!(summary["sum_lengths_ok"], serde_json::json!(true));
}

#[test]
fn single_point_rows_are_bare_ones() {
    let out = run_ok(&[
        "sample",
        "--model",
        &model("const11.json"),
        "--n",
        "1",
        "--samples",
        "5",
        "--seed",
        "1",
    ]);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows, vec!["1"; 5]);
}

#[test]
fn regime_report_is_json_with_known_fields() {
    let out = run_ok(&["asymp", "--model", &model("const11.json")]);
    let v: serde_json::Value = serde_json::from_str(&out).expect("valid JSON");
    assert_eq!(v["regime"], "Subcritical");
    assert!((v["r_star"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    let out = run_ok(&["asymp", "--model", &model("superpolylog.json"), "--n", "64"]);
    let v: serde_json::Value = serde_json::from_str(&out).expect("valid JSON");
    assert_eq!(v["regime"], "Supercritical");
    assert!((v["nu_tilde"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(v["exact_log_hn"].is_f64());
    assert!(v["asymptotic_log_hn"].is_f64());
    assert!(!out.contains("NaN") && !out.contains("inf"), "JSON carries no non-finite values");
}

#[test]
fn validate_quick_exits_clean() {
    assert_eq!(exit_code(&["validate", "--suite", "quick"]), 0);
}

#[test]
fn error_paths_use_the_documented_exit_codes() {
    // Malformed model JSON: parse failure.
    let bad = std::env::temp_dir().join("permcycles-bad-model.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let code = exit_code(&["exact", "--model", bad.to_str().unwrap(), "--n", "3", "--what", "partition"]);
    assert_eq!(code, 2);

    // Domain/size errors.
    assert_eq!(
        exit_code(&["exact", "--model", &model("const11.json"), "--n", "0", "--what", "partition"]),
        3
    );
    assert_eq!(
        exit_code(&["exact", "--model", &model("const11.json"), "--n", "999999", "--what", "partition"]),
        3
    );

    // Unsupported regime: the critical polylog with s in (1,2) has a skewed
    // stable fluctuation limit that the sampler does not cover.
    let stable = std::env::temp_dir().join("permcycles-critstable-model.json");
    // 1/zeta(1.5), zeta(1.5) computed with mpmath at 60-digit precision.
    std::fs::write(
        &stable,
        r#"{"theta":{"kind":"constant","c":1.0},
            "kappa":{"kind":"polylog","kstar":0.3827933839994266,"s":1.5}}"#,
    )
    .unwrap();
    let code = exit_code(&[
        "limitlaws",
        "--what",
        "tn-limit",
        "--model",
        stable.to_str().unwrap(),
        "--samples",
        "1",
        "--seed",
        "1",
    ]);
    assert_eq!(code, 4);
}

#[test]
fn json_format_mirrors_the_csv_table() {
    let csv = run_ok(&["exact", "--model", &model("const11.json"), "--n", "4", "--what", "tn-dist"]);
    let json = run_ok(&[
        "exact",
        "--model",
        &model("const11.json"),
        "--n",
        "4",
        "--what",
        "tn-dist",
        "--format",
        "json",
    ]);
    let rows: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    let csv_rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), csv_rows.len());
    for (obj, line) in rows.iter().zip(csv_rows) {
        let (k, p) = line.split_once(',').unwrap();
        assert_eq!(obj["k"].as_u64().unwrap(), k.parse::<u64>().unwrap());
        let csv_p: f64 = p.parse().unwrap();
        assert_eq!(obj["probability"].as_f64().unwrap(), csv_p, "17 digits round-trip");
    }
}
