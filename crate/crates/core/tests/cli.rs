//! End-to-end runs of the `haps` binary.

use haps_core::harness::{parse_metrics, Phase};
use std::path::Path;
use std::process::{Command, Output};

fn haps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haps"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    std::fs::write(&path, "eval_every = 1\neval_episodes = 1\n").unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&haps(&["--help"])), 0);
    assert_eq!(code(&haps(&["train", "--bogus"])), 1);
    assert_eq!(code(&haps(&[])), 1);
}

#[test]
fn unknown_baseline_and_bad_config_exit_one() {
    let out = haps(&["baseline", "teleport", "--episodes", "1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("teleport"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "no_such_key = 3\n").unwrap();
    assert_eq!(code(&haps(&["check", "--config", cfg.to_str().unwrap()])), 1);
    std::fs::write(&cfg, "[ppo]\nclip_eps = -1.0\n").unwrap();
    assert_eq!(code(&haps(&["check", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn check_passes_on_defaults() {
    let out = haps(&["check"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{text}");
    assert!(!text.contains("FAIL"));
    assert!(text.lines().filter(|l| l.starts_with("[PASS]")).count() >= 7);
}

#[test]
fn train_eval_plot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let run = dir.path().join("run");
    let run_s = run.to_str().unwrap();
    let out = haps(&[
        "train",
        "--config",
        &cfg,
        "--episodes",
        "2",
        "--seed",
        "3",
        "--out",
        run_s,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let rows = parse_metrics(&std::fs::read_to_string(run.join("metrics.csv")).unwrap()).unwrap();
    let train: Vec<_> = rows.iter().filter(|r| r.phase == Phase::Train).collect();
    let eval: Vec<_> = rows.iter().filter(|r| r.phase == Phase::Eval).collect();
    assert_eq!(train.len(), 2);
    assert_eq!(eval.len(), 8);
    assert_eq!(train.iter().map(|r| r.episode).collect::<Vec<_>>(), [1, 2]);
    for name in ["config.toml", "checkpoint_best.txt", "checkpoint_final.txt"] {
        assert!(run.join(name).is_file(), "{name} missing");
    }

    let ckpt = run.join("checkpoint_final.txt");
    let trace = dir.path().join("trace.csv");
    let out = haps(&[
        "eval",
        "--config",
        &cfg,
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--scenario",
        "2",
        "--episodes",
        "1",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("policy scenario 2"));
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 129);

    let out = haps(&["plot", run.join("metrics.csv").to_str().unwrap(), "--window", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for panel in [
        "train_reward.svg",
        "train_throughput.svg",
        "eval_reward.svg",
        "eval_throughput.svg",
    ] {
        assert!(run.join(panel).is_file(), "{panel} missing");
    }
}

#[test]
fn checkpoint_from_other_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let out = haps(&["train", "--episodes", "1", "--out", run.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let other = dir.path().join("other.toml");
    std::fs::write(&other, "[net]\nhidden_width = 64\n").unwrap();
    let ckpt = run.join("checkpoint_final.txt");
    let out = haps(&[
        "eval",
        "--config",
        other.to_str().unwrap(),
        "--checkpoint",
        ckpt.to_str().unwrap(),
        "--episodes",
        "1",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn baselines_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("oracle.csv");
    let out = haps(&[
        "baseline",
        "oracle",
        "--scenario",
        "1",
        "--episodes",
        "2",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("over 2 episodes"));
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 129);
}
