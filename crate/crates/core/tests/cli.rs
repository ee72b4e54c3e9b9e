use std::process::Command;

use sdenet::experiment::{read_loss_csv, ExperimentConfig};

fn sdenet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdenet"))
}

#[test]
fn oracle_prints_prices() {
    let out = sdenet().args(["oracle", "bs"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // ATM with r = 0: 100 (2 Phi(0.16) - 1)
    assert!(text.contains("european put: 12.711"), "{text}");
    let out = sdenet().args(["oracle", "binomial", "--steps", "200"]).output().unwrap();
    assert!(out.status.success());
}

#[test]
fn malformed_config_exits_nonzero_without_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "net = \"nvnet\"\nbatch = \"many\"\n").unwrap();
    let run = dir.path().join("run");
    let out = sdenet()
        .args(["train", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&run)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!run.exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("batch"));
}

#[test]
fn train_to_csv_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("run.csv");
    let status = sdenet()
        .args(["train", "--model", "bsm", "--net", "nvnet", "--steps", "2", "--batch", "32"])
        .args(["--iters", "4", "--seed", "5", "--bridge", "off", "--out"])
        .arg(&csv)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = read_loss_csv(&csv).unwrap();
    assert_eq!(rows.iter().map(|r| r.iteration).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    let header = std::fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("iteration,loss,wall_ms"));

    let svg = dir.path().join("plot.svg");
    let out = sdenet().arg("report").arg(&csv).arg("--svg").arg(&svg).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("plateau_iteration"));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn run_directory_is_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "model = \"heston\"\nsteps = 2\nbatch = 16\niters = 2\n").unwrap();
    let run = dir.path().join("run");
    let status = sdenet().args(["train", "--config"]).arg(&cfg).arg("--out").arg(&run).status().unwrap();
    assert!(status.success());
    let snap = ExperimentConfig::load(&run.join("config.toml")).unwrap();
    assert_eq!(snap, ExperimentConfig::load(&cfg).unwrap());
    assert!(run.join("report.txt").exists());
    assert!(run.join("loss.svg").exists());
}

#[test]
fn converge_without_reference_is_a_usage_error() {
    let out = sdenet().args(["converge", "--model", "heston", "--scheme", "nv", "--points", "64"]).output().unwrap();
    assert!(!out.status.success());
    let out = sdenet().args(["converge", "--scheme", "rk4"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn converge_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("em.csv");
    let out = sdenet()
        .args(["converge", "--scheme", "em", "--steps", "2,4", "--points", "1024", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("slope"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
}
