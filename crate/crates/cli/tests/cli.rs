use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn comstab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_comstab"))
        .current_dir(dir)
        .env_remove("COMSTAB_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref())
        .unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

#[test]
fn gains_prints_observer_and_feedback_gains() {
    let dir = TempDir::new().unwrap();
    let o = comstab(dir.path(), &["gains", "100", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for line in ["phi1 = 300", "phi2 = 30000", "phi3 = 1000000", "kp = 100", "kd = 20"] {
        assert!(out.lines().any(|l| l == line), "missing {line:?} in\n{out}");
    }
}

#[test]
fn gains_rejects_nonpositive_bandwidth() {
    let dir = TempDir::new().unwrap();
    let o = comstab(dir.path(), &["gains", "--", "-5", "10"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn steer_writes_traces_and_metrics() {
    let dir = TempDir::new().unwrap();
    let o = comstab(dir.path(), &["steer"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("comstab-out");
    let metrics = read(out.join("steering_metrics.csv"));
    let mut lines = metrics.lines();
    assert!(lines.next().unwrap().starts_with("controller,overshoot_pct"));
    assert_eq!(lines.count(), 2);
    let trace = read(out.join("steering_fuzzy-pid.csv"));
    assert!(trace.lines().count() > 1000);
    assert!(out.join("steering_pid.csv").exists());
}

#[test]
fn uncontrolled_steering_keeps_k_flat() {
    let dir = TempDir::new().unwrap();
    let o = comstab(dir.path(), &["steer", "--controller", "none", "--duration", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = read(dir.path().join("comstab-out/steering_none.csv"));
    let header: Vec<&str> = trace.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "K").expect("K column");
    let ks: Vec<&str> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap())
        .collect();
    assert!(ks.iter().all(|k| *k == ks[0]));
}

#[test]
fn steering_output_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert_eq!(comstab(d.path(), &["steer", "--duration", "2"]).status.code(), Some(0));
    }
    for f in ["steering_metrics.csv", "steering_pid.csv", "steering_fuzzy-pid.csv"] {
        assert_eq!(
            read(a.path().join("comstab-out").join(f)),
            read(b.path().join("comstab-out").join(f)),
            "{f}"
        );
    }
}

#[test]
fn out_directory_comes_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_comstab"))
        .current_dir(dir.path())
        .env("COMSTAB_OUT", "elsewhere")
        .args(["export", "tables"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("elsewhere/rule_tables.txt").exists());
    assert!(!dir.path().join("comstab-out").exists());
}

#[test]
fn malformed_config_reports_line_and_exits_1() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.toml"), "seed = 3\n[steering\nduration = 1\n").unwrap();
    let o = comstab(dir.path(), &["--config", "c.toml", "steer"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.toml"), "[steering]\ndurration = 1.0\n").unwrap();
    let o = comstab(dir.path(), &["--config", "c.toml", "steer"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("durration"), "{}", stderr(&o));
}

#[test]
fn invalid_config_value_exits_1() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("c.toml"), "[steering]\nduration = -1.0\n").unwrap();
    let o = comstab(dir.path(), &["--config", "c.toml", "steer"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    let dir = TempDir::new().unwrap();
    assert_eq!(comstab(dir.path(), &["steer", "--bogus"]).status.code(), Some(1));
    assert_eq!(comstab(dir.path(), &[]).status.code(), Some(1));
    let help = comstab(dir.path(), &["--help"]);
    assert_eq!(help.status.code(), Some(0));
    let text = stdout(&help);
    assert!(text.contains("published value"));
    assert!(text.contains("design default"));
    assert!(text.contains("vehicle.k_target"));
}

#[test]
fn exported_config_round_trips_through_the_loader() {
    let dir = TempDir::new().unwrap();
    assert_eq!(comstab(dir.path(), &["export", "config"]).status.code(), Some(0));
    let o = comstab(
        dir.path(),
        &["--config", "comstab-out/config.toml", "steer", "--duration", "1"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn export_targets_write_their_files() {
    let dir = TempDir::new().unwrap();
    for (what, file) in [
        ("gait", "gait.csv"),
        ("tables", "rule_tables.txt"),
        ("yaw-gain", "yaw_gain.csv"),
    ] {
        let o = comstab(dir.path(), &["export", what, "--duration", "1.2"]);
        assert_eq!(o.status.code(), Some(0), "{what}: {}", stderr(&o));
        assert!(dir.path().join("comstab-out").join(file).exists(), "{file}");
    }
    let gait = read(dir.path().join("comstab-out/gait.csv"));
    assert!(gait.starts_with("t,hip_x,hip_z"));
    assert!(gait.lines().next().unwrap().contains("theta6"));
}

#[test]
fn walking_tip_over_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = comstab(
        dir.path(),
        &[
            "walk",
            "--controller",
            "pid",
            "--duration",
            "1.5",
            "--disturbance-scale",
            "50",
        ],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("support polygon"));
    let metrics = read(dir.path().join("comstab-out/walking_metrics.csv"));
    assert_eq!(metrics.lines().count(), 3);
}

#[test]
fn calm_walk_exits_0() {
    let dir = TempDir::new().unwrap();
    let o = comstab(
        dir.path(),
        &[
            "walk",
            "--controller",
            "vufc-adrc-graded",
            "--duration",
            "1.5",
            "--disturbance-scale",
            "0",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("comstab-out/walking_vufc-adrc-grading.csv").exists());
}

#[test]
fn grader_training_is_reproducible_and_loadable() {
    let dir = TempDir::new().unwrap();
    let train = |name: &str| {
        let o = comstab(
            dir.path(),
            &["--seed", "11", "train-grader", "--runs", "1", "--samples", "5", "--model-out", name],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        read(dir.path().join(name))
    };
    let a = train("a.txt");
    assert_eq!(a, train("b.txt"));
    assert_eq!(a.lines().filter(|l| !l.starts_with('#')).count(), 10);
    let o = comstab(
        dir.path(),
        &["walk", "--controller", "vufc-adrc-graded", "--duration", "1", "--model", "a.txt"],
    );
    assert!(matches!(o.status.code(), Some(0 | 2)), "{}", stderr(&o));
}

#[test]
fn grader_training_needs_five_samples() {
    let dir = TempDir::new().unwrap();
    let o = comstab(dir.path(), &["train-grader", "--runs", "1", "--samples", "4"]);
    assert_eq!(o.status.code(), Some(1));
}
