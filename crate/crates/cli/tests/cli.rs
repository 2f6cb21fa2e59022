use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn sqs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqs"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = sqs(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &[&str] = &["--override", "geometry.sites=7", "--override", "engine.n_steps=200"];

fn with_small<'a>(head: &[&'a str]) -> Vec<&'a str> {
    let mut v = head.to_vec();
    v.extend_from_slice(SMALL);
    v
}

#[test]
fn sample_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let args = with_small(&["sample", "--seed", "7", "--override", "measurement.shots=500"]);
    let names = ["shots.txt", "shots_raw.txt", "estimate.json", "manifest.json"];
    ok(&dir, &args);
    let first: Vec<Vec<u8>> = names.iter().map(|n| std::fs::read(dir.join(n)).unwrap()).collect();
    ok(&dir, &args);
    for (name, bytes) in names.iter().zip(first) {
        assert_eq!(std::fs::read(dir.join(name)).unwrap(), bytes, "{name} differs");
    }
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    ok(&dir, &with_small(&["sweep"]));
    let manifest = json(&dir.join("manifest.json"));
    let files = manifest["files"].as_array().unwrap();
    let mut listed: Vec<String> = Vec::new();
    for f in files {
        let name = f["path"].as_str().unwrap();
        let bytes = std::fs::read(dir.join(name)).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        listed.push(name.to_string());
    }
    let mut on_disk: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    assert_eq!(listed, on_disk);
    assert!(manifest["config_sha256"].is_string());
    assert_eq!(manifest["command"], "sweep");
}

#[test]
fn fit_recovers_known_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("p.csv");
    let (p0, b0) = (0.03, 0.4);
    let mut text = String::from("size,p\n");
    for n in [9, 11, 13, 15, 17] {
        text.push_str(&format!("{n},{}\n", p0 * f64::powi(b0, n - 13)));
    }
    std::fs::write(&csv, text).unwrap();
    let dir = tmp.path().join("fit");
    let input = format!("fit.input=\"{}\"", csv.display());
    ok(&dir, &["fit", "--override", &input]);
    let fit = json(&dir.join("fit.json"));
    assert!((fit["p"].as_f64().unwrap() - p0).abs() < 1e-10);
    assert!((fit["b"].as_f64().unwrap() - b0).abs() < 1e-10);
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sqs(&tmp.path().join("x"), &["geometry", "--override", "geometry.no_such_key=1"]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[schedule]\nrate = -1.0\n").unwrap();
    let out = sqs(&tmp.path().join("y"), &["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = sqs(&tmp.path().join("z"), &["fit"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mps_engine_agrees_with_dense() {
    let tmp = tempfile::tempdir().unwrap();
    let (d, m) = (tmp.path().join("dense"), tmp.path().join("mps"));
    let args = ["sweep", "--override", "geometry.sites=7", "--override", "engine.n_steps=1000"];
    ok(&d, &args);
    ok(&m, &[&args[..], &["--engine", "mps"]].concat());
    let pd = json(&d.join("summary.json"));
    let pm = json(&m.join("summary.json"));
    let key = |v: &Value| v["final"]["p_mis"].as_f64().unwrap();
    assert!((key(&pd) - key(&pm)).abs() < 1e-3, "dense {pd} vs mps {pm}");
}

#[test]
fn geometry_writes_mis() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("g");
    ok(&dir, &with_small(&["geometry"]));
    let mis = json(&dir.join("mis.json"));
    assert!(mis["size"].as_u64().unwrap() > 0);
    assert_eq!(mis["designated_is_maximum"], true);
}
