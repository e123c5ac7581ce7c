use std::path::Path;
use std::process::{Command, Output};

use crit_core::cli::archive::{Manifest, MANIFEST};
use crit_core::cli::estimate::read_rows;

fn crit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crit")).args(args).env_remove("CRIT_THREADS").output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.json");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const MINIMAL: &str = r#"{"schema_version": "crit-run/1", "experiment": "mini", "sides": [8], "boundary": "plus", "samples": 100, "seed": 5}"#;

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != MANIFEST)
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn minimal_config_writes_one_row_per_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), MINIMAL);
    let out = tmp.path().join("a");
    let o = crit(&["sample", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = Manifest::load(&out).unwrap();
    let recs = m.records(&out).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].0, 8);
    assert_eq!(recs[0].1.len(), 100);
    assert_eq!(m.files.iter().map(|f| f.rows).sum::<usize>(), 100);
}

#[test]
fn rerun_is_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let body = MINIMAL.replace(r#""samples": 100"#, r#""samples": 60, "snapshots": true, "sobolev_alpha": 2.0"#);
    let cfg = write_config(tmp.path(), &body);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(crit(&["sample", "--config", &cfg, "--out", a.to_str().unwrap(), "--threads", "1"]).status.success());
    assert!(crit(&["sample", "--config", &cfg, "--out", b.to_str().unwrap(), "--threads", "3"]).status.success());
    assert_eq!(data_files(&a), data_files(&b));
    let (ma, mb) = (Manifest::load(&a).unwrap(), Manifest::load(&b).unwrap());
    assert_eq!(ma.config_hash, mb.config_hash);
    assert_eq!(ma.files, mb.files);
}

#[test]
fn missing_seed_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &MINIMAL.replace(r#", "seed": 5"#, ""));
    let o = crit(&["sample", "--config", &cfg, "--out", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    // --seed supplies it
    let o = crit(&["sample", "--config", &cfg, "--seed", "9", "--out", tmp.path().join("y").to_str().unwrap()]);
    assert!(o.status.success());
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &MINIMAL.replace("[8]", "[12]"));
    assert_eq!(crit(&["sample", "--config", &cfg]).status.code(), Some(2));
    let missing = tmp.path().join("nope.json");
    assert_eq!(crit(&["sample", "--config", missing.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(crit(&["estimate", "nonsense"]).status.code(), Some(2));
    assert_eq!(crit(&["estimate", "two-point", tmp.path().join("none").to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn riesz_estimate_needs_no_inputs() {
    let o = crit(&["estimate", "riesz"]);
    assert!(o.status.success());
    let rows = read_rows(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].estimate - 1.2392596325485772698).abs() < 1e-10);
}

#[test]
fn estimates_from_an_archive() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{"schema_version": "crit-run/1", "experiment": "e", "sides": [8, 16], "boundary": "plus",
        "samples": 64, "seed": 3, "snapshots": true, "sobolev_alpha": 2.0, "sobolev_j_max": 16}"#;
    let cfg = write_config(tmp.path(), body);
    let a = tmp.path().join("a");
    assert!(crit(&["sample", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    let dir = a.to_str().unwrap();
    for kind in ["two-point", "one-arm", "moments", "mgf", "charfun", "sobolev", "kpoint", "blocks", "cutoff"] {
        let o = crit(&["estimate", kind, dir]);
        assert!(o.status.success(), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        let rows = read_rows(o.stdout.as_slice()).unwrap();
        assert!(!rows.is_empty(), "{kind}");
        assert!(rows.iter().all(|r| !r.anchor.is_empty()));
    }
    let tp = read_rows(crit(&["estimate", "two-point", dir]).stdout.as_slice()).unwrap();
    assert_eq!(tp.iter().filter(|r| r.quantity == "rho_connectivity").count(), 2);
    let o = crit(&["estimate", "ks", dir, dir]);
    let ks = read_rows(o.stdout.as_slice()).unwrap();
    assert_eq!(ks.len(), 1);
    assert_eq!(ks[0].estimate, 0.0);
}

#[test]
fn oracle_table_matches_the_frozen_golden_file() {
    let o = crit(&["oracle"]);
    assert!(o.status.success());
    let frozen = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/golden.csv")).unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), frozen);
}

#[test]
fn fast_acceptance_report_validates_against_the_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("report.json");
    let o = crit(&["acceptance", "--tier", "fast", "--threads", "2", "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let schema: serde_json::Value = serde_json::from_str(crit_core::cli::acceptance::REPORT_SCHEMA).unwrap();
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    assert!(compiled.is_valid(&value));
    let mut broken = value.clone();
    broken["criteria"][0]["status"] = "maybe".into();
    assert!(!compiled.is_valid(&broken));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(stderr.lines().filter(|l| l.starts_with("PASS") || l.starts_with("SKIP")).count(), 13);
}
