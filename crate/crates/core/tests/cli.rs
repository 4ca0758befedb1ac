//! Exit codes and artifacts of the `bpderiv` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bpderiv"))
}

fn shipped_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/disk.cfg")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn no_arguments_is_usage_error() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn malformed_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "region = disk\nwibble = 3\n").unwrap();
    let out = run(&["region", "gen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wibble"));
}

#[test]
fn p_at_most_two_needs_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.cfg");
    fs::write(&cfg, "p = 1.5\nresolution = 128\n").unwrap();
    let out_dir = dir.path().join("out");
    let c = cfg.to_str().unwrap();
    let o = out_dir.to_str().unwrap();
    let out = run(&["verify", "representing", "--config", c, "--out", o]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 < p < infinity"));

    let out = run(&["verify", "representing", "--config", c, "--out", o, "--allow-p-le-2"]);
    assert_ne!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("exploratory"));
}

#[test]
fn region_gen_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let out = run(&["region", "gen", "--out", o, "--resolution", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let rgn = fs::read_to_string(dir.path().join("region.rgn")).unwrap();
    assert!(rgn.starts_with("RGN1"));
    let cfg = fs::read_to_string(dir.path().join("config.cfg")).unwrap();
    assert!(cfg.contains("resolution = 64"));
}

#[test]
fn shipped_config_theorem1_passes_and_is_deterministic() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = run(&[
            "experiment",
            "theorem1",
            "--config",
            shipped_config().to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        assert!(d.path().join("metadata.json").exists());
    }
    for file in ["report.json", "probes.csv", "density.csv", "representing_order1.csv", "region.rgn"] {
        let a = fs::read(dirs[0].path().join(file)).unwrap();
        let b = fs::read(dirs[1].path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
    let without_out = |d: &tempfile::TempDir| {
        let text = fs::read_to_string(d.path().join("config.cfg")).unwrap();
        text.lines().filter(|l| !l.starts_with("out =")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(without_out(&dirs[0]), without_out(&dirs[1]));
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dirs[0].path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    for check in json["checks"].as_array().unwrap() {
        let tag = check["source"].as_str().unwrap();
        assert!(tag == "theory-constant" || tag == "config-tolerance");
    }
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.cfg");
    fs::write(&cfg, "resolution = 128\ntol_battery = 1e-14\n").unwrap();
    let out = run(&["verify", "representing", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
