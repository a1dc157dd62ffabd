use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cellfree-isac"))
}

fn baseline() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/baseline.cfg")
}

#[test]
fn validate_config_prints_resolved_values() {
    let out = bin().args(["validate-config", "--config"]).arg(baseline()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("aps = 64"));
    assert!(text.contains("mode = UTC"));
}

#[test]
fn invalid_config_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "pfa = 2\n").unwrap();
    let out = bin().args(["validate-config", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pfa"));
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = bin().arg("run").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["run", "--config", "x.cfg", "--unknown"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn calibrate_pfa_prints_both_thresholds() {
    let out = bin().args(["calibrate-pfa", "--rank", "12", "--pfa", "0.01"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let value = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(key))
            .and_then(|v| v.trim_start_matches(" = ").trim().parse().ok())
            .unwrap_or_else(|| panic!("{key} missing in {text}"))
    };
    let a = value("analytic_threshold");
    let m = value("monte_carlo_threshold");
    assert!((a - m).abs() / a < 0.01);
}

#[test]
fn run_writes_outputs_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["run", "--config"])
        .arg(baseline())
        .args(["--drops", "1", "--fading", "2", "--seed", "7", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let echoed = std::fs::read_to_string(out_dir.join("config.cfg")).unwrap();
    assert!(echoed.contains("seed = 7"));
    assert!(echoed.contains("drops = 1"));
    assert!(out_dir.join("utc/metrics.csv").exists());
    assert!(out_dir.join("summary.txt").exists());
}

#[test]
fn output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("CELLFREE_ISAC_OUT", dir.path())
        .args(["run", "--config"])
        .arg(baseline())
        .args(["--drops", "1", "--fading", "1", "--set", "ues=4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("run/utc/metrics.csv").exists());
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = bin()
        .args(["run", "--config"])
        .arg(baseline())
        .args(["--drops", "1", "--fading", "1", "--out"])
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rx_sweep_rejects_zero_receivers() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["preset-rx-sweep", "--config"])
        .arg(baseline())
        .args(["--rx", "0,1", "--drops", "1", "--fading", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
