use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn plumeseek(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plumeseek")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn tiny_config(dir: &Path) -> PathBuf {
    let cfg = json!({
        "grid": { "x_min": 0.0, "x_max": 8.0, "y_min": 0.0, "y_max": 8.0,
                  "a_cells": 8, "b_cells": 8, "i_cells": 8, "j_cells": 8 },
        "plume": { "kind": "isotropic-blob", "strength": 1.0, "length_scale": 2.0, "wind": { "x": 0.0, "y": 0.0 },
                   "sigma0": 0.5, "spread_rate": 0.1, "noise_sigma": 0.2 },
        "sim": { "n_agents": 2, "n_steps": 15, "ig_threshold_bits": 2.0 },
        "rl": { "n_agents": 2, "horizon": 20, "episodes": 2, "batch_size": 8, "hidden": [8], "smoothing_window": 5 },
        "bench_sizes": [1, 2, 4],
        "seeds": [5]
    });
    let path = dir.join("tiny.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn missing_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = plumeseek(&["simulate", "--config", s(&tmp.path().join("nope.json")), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    assert_eq!(code(&plumeseek(&["train", "--out", s(&out)])), 2);
    assert!(!out.exists());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    std::fs::write(&path, r#"{ "sim": { "n_agent": 3 } }"#).unwrap();
    let o = plumeseek(&["simulate", "--config", s(&path), "--out", s(&tmp.path().join("out"))]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_agent"));
}

#[test]
fn simulate_writes_episodes_summary_and_figure() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path());
    let out = tmp.path().join("out");
    let o = plumeseek(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for policy in ["info", "cost-only", "random"] {
        let csv = std::fs::read_to_string(out.join(policy).join("episode_5.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("step,agent_id,x,y,m,ig_bits,cost"));
        assert_eq!(lines.count(), 15 * 2);
    }
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["policies"].as_array().unwrap().len(), 3);
    assert_eq!(summary["runs"].as_array().unwrap().len(), 3);
    assert!(out.join("effective_config.json").exists());
    assert!(std::fs::read_to_string(out.join("ig_curves.svg")).unwrap().starts_with("<svg"));

    let again = plumeseek(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&again), 2);
    let forced = plumeseek(&["simulate", "--config", s(&cfg), "--out", s(&out), "--force"]);
    assert_eq!(code(&forced), 0);
}

#[test]
fn single_policy_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path());
    let out = tmp.path().join("out");
    let o = plumeseek(&["simulate", "--config", s(&cfg), "--out", s(&out), "--policy", "random", "--seed", "1", "--seed", "2"]);
    assert_eq!(code(&o), 0);
    assert!(out.join("random/episode_1.csv").exists());
    assert!(out.join("random/episode_2.csv").exists());
    assert!(!out.join("info").exists());
}

#[test]
fn train_writes_curves_checkpoints_and_is_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path());
    let out = tmp.path().join("out");
    let run = || plumeseek(&["train", "--config", s(&cfg), "--out", s(&out), "--threads", "1", "--force"]);
    assert_eq!(code(&run()), 0);
    let curves = std::fs::read_to_string(out.join("communicating/curves_5.csv")).unwrap();
    assert_eq!(curves.lines().next(), Some("step,agent_id,smoothed_reward"));
    let ckpt = std::fs::read_to_string(out.join("individual/checkpoint_5_agent1.json")).unwrap();
    serde_json::from_str::<Value>(&ckpt).unwrap();
    assert!(out.join("reward_curves.svg").exists());
    assert_eq!(code(&run()), 0);
    assert_eq!(std::fs::read_to_string(out.join("communicating/curves_5.csv")).unwrap(), curves);
    assert_eq!(std::fs::read_to_string(out.join("individual/checkpoint_5_agent1.json")).unwrap(), ckpt);
}

#[test]
fn bench_on_tiny_grids_and_plot_regenerates() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path());
    let out = tmp.path().join("out");
    let o = plumeseek(&["bench", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("bench.csv")).unwrap();
    let sizes: Vec<usize> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(sizes, vec![1, 2, 4]);

    std::fs::remove_file(out.join("bench.svg")).unwrap();
    assert_eq!(code(&plumeseek(&["plot", "--out", s(&out)])), 0);
    assert!(out.join("bench.svg").exists());
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(code(&plumeseek(&["plot", "--out", s(&empty)])), 2);
}
