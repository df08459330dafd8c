//! Runs the `ditherlab` binary: exit codes, artifacts, config precedence and
//! run-to-run determinism.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ditherlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ditherlab"))
        .args(args)
        .env_remove("DITHERLAB_MNIST_DIR")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    ditherlab(args).status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["demod", "--help"]), 0);
}

#[test]
fn usage_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let out = path(tmp.path());
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["bogus"]), 1);
    assert_eq!(code(&["demod", "--replicas", "many"]), 1);
    assert_eq!(code(&["train", "--regime", "bogus", "--out-dir", out]), 1);
    assert_eq!(code(&["train", "--activation", "biased-sigmoid", "--out-dir", out]), 1);
    assert_eq!(code(&["train", "--lr", "-1", "--out-dir", out]), 1);
    assert_eq!(code(&["demod", "--carrier-hz", "30000", "--out-dir", out]), 1);
}

#[test]
fn missing_data_exits_two() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let missing = tmp.path().join("nowhere");
    let o = ditherlab(&["train", "--mnist-dir", path(&missing), "--out-dir", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("nowhere"), "{err}");
}

fn short_demod(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["demod", "--duration-s", "1", "--replicas", "8", "--out-dir", path(out)];
    args.extend_from_slice(extra);
    ditherlab(&args)
}

#[test]
fn demod_writes_every_artifact_and_repeats_exactly() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(short_demod(&a, &[]).status.success());
    assert!(short_demod(&b, &["--workers", "3"]).status.success());
    for f in [
        "spectrum_plain.csv",
        "spectrum_dithered.csv",
        "distortion_report.txt",
        "distortion_report.csv",
        "demod.svg",
        "run.conf",
        "manifest.json",
    ] {
        assert!(a.join(f).is_file(), "{f}");
    }
    for f in ["spectrum_plain.csv", "spectrum_dithered.csv", "distortion_report.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "demod");
    assert_eq!(manifest["artifacts"].as_array().unwrap().len(), 6);
}

#[test]
fn flags_override_config_file_which_overrides_defaults() {
    let tmp = TempDir::new().unwrap();
    let conf = tmp.path().join("run.conf");
    fs::write(&conf, "# demo\nreplicas = 3\nmod_hz = 120\nseed = 9\n").unwrap();
    let out = tmp.path().join("out");
    let o = short_demod(&out, &["--config", path(&conf), "--seed", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written = fs::read_to_string(out.join("run.conf")).unwrap();
    assert!(written.contains("replicas = 8"), "{written}");
    assert!(written.contains("mod-hz = 120"), "{written}");
    assert!(written.contains("seed = 4"), "{written}");
    assert!(written.contains("carrier-hz = 10000"), "{written}");

    // A written run.conf reproduces the run when fed back.
    let again = tmp.path().join("again");
    assert!(ditherlab(&["demod", "--config", path(&out.join("run.conf")), "--out-dir", path(&again)])
        .status
        .success());
    assert_eq!(
        fs::read(out.join("spectrum_dithered.csv")).unwrap(),
        fs::read(again.join("spectrum_dithered.csv")).unwrap()
    );
}

#[test]
fn train_and_compare_are_reproducible_across_worker_counts() {
    let Some(mnist) = common::mnist_dir() else {
        eprintln!("MNIST files not found; skipping");
        return;
    };
    let tmp = TempDir::new().unwrap();
    let run = |name: &str, cmd: &str, workers: &str, extra: &[&str]| {
        let out = tmp.path().join(name);
        let mut args = vec![
            cmd,
            "--mnist-dir",
            path(&mnist),
            "--epochs",
            "2",
            "--replicas",
            "6",
            "--subset",
            "64",
            "--workers",
            workers,
            "--out-dir",
            path(&out),
        ];
        args.extend_from_slice(extra);
        let o = ditherlab(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a", "train", "1", &["--regime", "parallel_dither_dropout", "--checkpoints"]);
    let b = run("b", "train", "3", &["--regime", "parallel_dither_dropout"]);
    assert_eq!(fs::read(a.join("curve.csv")).unwrap(), fs::read(b.join("curve.csv")).unwrap());
    let last = ditherlab::checkpoint::load(&a.join("checkpoints/epoch_002.bin")).unwrap();
    assert_eq!(last.layout(), ditherlab::Layout::MNIST);

    let c = run("c", "compare", "1", &[]);
    let d = run("d", "compare", "2", &[]);
    let csv = fs::read_to_string(c.join("compare.csv")).unwrap();
    assert_eq!(csv, fs::read_to_string(d.join("compare.csv")).unwrap());
    assert!(csv.starts_with("epoch,baseline,dropout,parallel_dither,parallel_dither_dropout"), "{csv}");
    assert_eq!(csv.lines().count(), 4);
    for f in ["compare.svg", "summary.csv", "summary.txt", "manifest.json", "run.conf"] {
        assert!(c.join(f).is_file(), "{f}");
    }
}

#[test]
fn mnist_dir_falls_back_to_the_environment() {
    let Some(mnist) = common::mnist_dir() else {
        return;
    };
    let tmp = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ditherlab"))
        .args(["train", "--epochs", "1", "--subset", "16", "--out-dir", path(tmp.path())])
        .env("DITHERLAB_MNIST_DIR", &mnist)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let conf = fs::read_to_string(tmp.path().join("run.conf")).unwrap();
    assert!(conf.contains(&format!("mnist-dir = {}", mnist.display())), "{conf}");
}
