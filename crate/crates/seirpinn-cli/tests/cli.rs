//! End-to-end behavior of the binary: flags, exit codes, emitted files.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_seirpinn")
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("seirpinn-cli-{}-{name}", std::process::id()))
}

fn read_manifest(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).expect("manifest.json");
    serde_json::from_str(&text).expect("valid manifest json")
}

#[test]
fn simulate_writes_grid_and_manifest() {
    let out = tmp("simulate");
    let status = Command::new(bin())
        .args(["simulate", "--quiet", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,S,E,I,R");
    assert_eq!(lines.len(), 1 + 1001);
    assert!(lines[1].starts_with("0.0000000000000000e0,9.8999999999999999e-1,"));

    let manifest = read_manifest(&out);
    assert_eq!(manifest["command"], "simulate");
    let files: Vec<String> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["path"].as_str().unwrap().to_string())
        .collect();
    assert!(files.contains(&"trajectory.csv".to_string()));
    assert!(manifest["results"]["max_conservation_drift"].as_f64().unwrap() <= 1e-9);
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn invalid_config_exits_with_validation_code() {
    let out = tmp("badcfg");
    let cfg = tmp("badcfg-toml").with_extension("toml");
    std::fs::write(&cfg, "dt = -0.5\n").unwrap();
    let status = Command::new(bin())
        .args(["simulate", "--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn unknown_config_key_exits_with_validation_code() {
    let cfg = tmp("unknown-key").with_extension("toml");
    std::fs::write(&cfg, "epochz = 10\n").unwrap();
    let status = Command::new(bin())
        .args(["simulate", "--quiet", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn flags_override_config_values() {
    let out = tmp("override");
    let cfg = tmp("override-toml").with_extension("toml");
    std::fs::write(&cfg, "epochs = 999999\nn_train = 8\nn_test = 6\nhidden_layers = [8]\n")
        .unwrap();
    let status = Command::new(bin())
        .args(["train-forward", "--quiet", "--epochs", "40", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = read_manifest(&out);
    assert_eq!(manifest["config"]["epochs"], 40);
    assert_eq!(manifest["config"]["n_train"], 8);
    let record = std::fs::read_to_string(out.join("train_record.csv")).unwrap();
    assert_eq!(record.lines().count(), 1 + 40);
    std::fs::remove_dir_all(&out).ok();
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn run_is_reproducible_from_its_manifest() {
    // The manifest's resolved config, re-serialized as a config file, must
    // reproduce the run: identical file checksums.
    let out1 = tmp("repro-1");
    let status = Command::new(bin())
        .args(["train-forward", "--quiet", "--epochs", "30", "--seed-init", "9", "--out"])
        .arg(&out1)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest1 = read_manifest(&out1);

    let cfg: seirpinn_cli::RunConfig =
        serde_json::from_value(manifest1["config"].clone()).unwrap();
    let cfg_path = tmp("repro-cfg").with_extension("toml");
    std::fs::write(&cfg_path, toml::to_string(&cfg).unwrap()).unwrap();

    let out2 = tmp("repro-2");
    let status = Command::new(bin())
        .args(["train-forward", "--quiet", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest2 = read_manifest(&out2);

    let checksums = |m: &serde_json::Value| -> Vec<(String, String)> {
        m["files"]
            .as_array()
            .unwrap()
            .iter()
            .map(|f| {
                (f["path"].as_str().unwrap().to_string(), f["sha256"].as_str().unwrap().to_string())
            })
            .collect()
    };
    assert_eq!(checksums(&manifest1), checksums(&manifest2));
    std::fs::remove_dir_all(&out1).ok();
    std::fs::remove_dir_all(&out2).ok();
    std::fs::remove_file(&cfg_path).ok();
}

#[test]
fn observability_prints_the_recovery_polynomial() {
    let out = tmp("obs");
    let output = Command::new(bin())
        .args(["observability", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(
        stdout.contains("(e)*E-d1Y+(-g)*Y"),
        "missing recovery polynomial in output:\n{stdout}"
    );
    assert!(stdout.contains("100-sample vanishing check passed"));
    let manifest = read_manifest(&out);
    assert_eq!(manifest["results"]["failures"].as_array().unwrap().len(), 0);
    std::fs::remove_dir_all(&out).ok();
}

#[test]
fn train_inverse_reports_both_estimates() {
    let out = tmp("inverse");
    let cfg = tmp("inverse-toml").with_extension("toml");
    std::fs::write(&cfg, "epochs = 60\nn_train = 8\nn_test = 6\nhidden_layers = [8]\n").unwrap();
    let status = Command::new(bin())
        .args(["train-inverse", "--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = read_manifest(&out);
    assert!(manifest["results"]["epsilon_at_min_test"].is_number());
    assert!(manifest["results"]["epsilon_at_min_train"].is_number());
    let record = std::fs::read_to_string(out.join("train_record.csv")).unwrap();
    assert!(record.starts_with("epoch,train_loss,test_error,epsilon\n"));
    std::fs::remove_dir_all(&out).ok();
    std::fs::remove_file(&cfg).ok();
}

#[test]
fn bo_commands_emit_traces_and_reports() {
    let out = tmp("bo");
    let cfg = tmp("bo-toml").with_extension("toml");
    std::fs::write(
        &cfg,
        "epochs = 50\nn_train = 8\nn_test = 6\nhidden_layers = [8]\nbo_iterations = 3\nbo_init_count = 2\n",
    )
    .unwrap();
    let status = Command::new(bin())
        .args(["bo-proposed", "--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let trace = std::fs::read_to_string(out.join("bo_trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1 + 3);
    assert!(trace.starts_with("iteration,epsilon,objective,is_initial\n"));
    let manifest = read_manifest(&out);
    assert!(manifest["results"]["epsilon_hat"].is_number());
    assert!(out.join("fig_bo_trace.svg").exists());
    assert!(out.join("fig_trajectories_proposed.svg").exists());

    let out2 = tmp("bo-baseline");
    let status = Command::new(bin())
        .args(["bo-baseline", "--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = read_manifest(&out2);
    for key in ["epsilon_hat_0", "epsilon_hat_1", "epsilon_hat_2"] {
        assert!(manifest["results"][key].is_number(), "missing {key}");
    }
    assert!(out2.join("fig_trajectories_baseline_min_test.svg").exists());
    assert!(out2.join("fig_trajectories_baseline_min_train.svg").exists());

    std::fs::remove_dir_all(&out).ok();
    std::fs::remove_dir_all(&out2).ok();
    std::fs::remove_file(&cfg).ok();
}
