use std::path::Path;
use std::process::{Command, Output};

fn schlicht(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schlicht"))
        .args(args)
        .env_remove("SCHLICHT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bounds_examples() {
    let o = schlicht(&["bounds", "--m", "2", "--beta", "0", "--kernel", "koebe"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("0.816497"), "{text}");
    assert!(text.contains("0.666667"), "{text}");

    let text = stdout(&schlicht(&["bounds", "--m", "2", "--beta", "0", "--alpha", "1", "--kernel", "koebe"]));
    assert!(text.contains("|a2| <=  0.5"), "{text}");
    assert!(text.contains("0.333333"), "{text}");

    let text = stdout(&schlicht(&["bounds", "--m", "2", "--beta", "0", "--kernel", "halfplane"]));
    assert!(text.contains("1.41421"), "{text}");
}

#[test]
fn bounds_json_carries_full_precision() {
    let o = schlicht(&["bounds", "--kernel", "koebe", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["a2_bound"].as_f64().unwrap(), (2.0f64 / 3.0).sqrt());
}

#[test]
fn bounds_table_matches_piecewise_curve() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("table.csv");
    let o = schlicht(&["bounds", "--table", "--steps", "10", "--out", path_str(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("piecewise curve: match"));
    let written = std::fs::read_to_string(&csv).unwrap();
    assert!(written.starts_with("m,beta,alpha_re"));
    // 10 grid points plus the knee at 1/3 and a header.
    assert_eq!(written.lines().count(), 12);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["bounds", "--m", "1"][..],
        &["bounds", "--beta", "1.2"],
        &["bounds", "--alpha", "-1"],
        &["bounds", "--alpha", "nonsense"],
        &["sample", "--alpha", "-0.5", "--n", "3"],
        &["sample", "--kernel-coeffs", "0,1", "--n", "3"],
        &["report"],
        &["bounds", "--no-such-flag"],
        &[],
    ] {
        let o = schlicht(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = schlicht(&["bounds", "--alpha", "-1"]);
    assert!(stderr(&o).contains("excluded"));
}

#[test]
fn identities_zero_trials_warns() {
    let o = schlicht(&["identities", "--n", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("vacuous"));
}

#[test]
fn identities_and_inverse_pass() {
    let o = schlicht(&["identities", "--n", "300", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = schlicht(&["verify-inverse", "--n", "200", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("closed-form max deviation"));
}

#[test]
fn sample_has_no_violations() {
    let o = schlicht(&["sample", "--m", "2", "--beta", "0", "--kernel", "koebe", "--n", "1000", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("violations          0"), "{}", stdout(&o));
}

fn sample_bytes(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let out = dir.join(name);
    let mut args = vec!["sample", "--m", "3", "--beta", "0.25", "--alpha", "0.5+0.5i", "--n", "200", "--out", path_str(&out)];
    args.extend_from_slice(extra);
    let o = schlicht(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    std::fs::read(out).unwrap()
}

#[test]
fn jsonl_identical_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let base = sample_bytes(dir.path(), "a.jsonl", &["--seed", "5", "--jobs", "1"]);
    assert_eq!(base.iter().filter(|&&b| b == b'\n').count(), 200);
    for (name, jobs) in [("b.jsonl", "2"), ("c.jsonl", "4"), ("d.jsonl", "1")] {
        assert_eq!(sample_bytes(dir.path(), name, &["--seed", "5", "--jobs", jobs]), base);
    }
}

#[test]
fn env_seed_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let direct = sample_bytes(dir.path(), "a.jsonl", &["--seed", "8"]);
    let out = dir.path().join("b.jsonl");
    let o = Command::new(env!("CARGO_BIN_EXE_schlicht"))
        .args(["sample", "--m", "3", "--beta", "0.25", "--alpha", "0.5+0.5i", "--n", "200", "--seed", "1"])
        .args(["--out", path_str(&out)])
        .env("SCHLICHT_SEED", "8")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(out).unwrap(), direct);
}

#[test]
fn config_file_supplies_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "bounds", "m": 3, "beta": 0.25, "alpha": "0.5+0.5i", "kernel": "halfplane", "format": "json"}"#,
    )
    .unwrap();
    let o = schlicht(&["--config", path_str(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["inputs"]["m"].as_f64(), Some(3.0));

    // Flags win over the file.
    let o = schlicht(&["bounds", "--config", path_str(&cfg), "--m", "4", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["inputs"]["m"].as_f64(), Some(4.0));

    std::fs::write(&cfg, r#"{"command": "bounds", "mm": 3}"#).unwrap();
    assert_eq!(schlicht(&["--config", path_str(&cfg)]).status.code(), Some(2));
}

#[test]
fn report_regrades_and_flags_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let batch = dir.path().join("batch.jsonl");
    let o = schlicht(&["sample", "--kernel", "halfplane", "--n", "100", "--seed", "2", "--out", path_str(&batch)]);
    assert_eq!(o.status.code(), Some(0));
    let o = schlicht(&["report", "--input", path_str(&batch)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    // Inflate a3 of the first accepted record without touching its verdict.
    let text = std::fs::read_to_string(&batch).unwrap();
    let mut corrupted = Vec::new();
    let mut done = false;
    for line in text.lines() {
        let mut v: serde_json::Value = serde_json::from_str(line).unwrap();
        if !done && v["accepted"] == true {
            v["extracted"]["a3"] = serde_json::json!([100.0, 0.0]);
            done = true;
        }
        corrupted.push(serde_json::to_string(&v).unwrap());
    }
    assert!(done);
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, corrupted.join("\n")).unwrap();
    let o = schlicht(&["report", "--input", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("regraded violations  1"), "{}", stdout(&o));
}

#[test]
fn search_stays_within_bound() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("w.jsonl");
    let o = schlicht(&["search", "--kernel", "halfplane", "--budget", "300", "--seed", "4", "--out", path_str(&witness)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("ratio"));
    assert_eq!(std::fs::read_to_string(witness).unwrap().lines().count(), 1);

    let o = schlicht(&["search", "--budget", "50", "--target", "combo", "--csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("target,bound,best_value,ratio"));
}

#[test]
fn sample_csv_summary() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("s.csv");
    let o = schlicht(&["sample", "--n", "20", "--csv", "--summary", path_str(&summary)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("label,m,beta"));
    assert_eq!(std::fs::read_to_string(summary).unwrap(), stdout(&o));
}
