use std::path::Path;
use std::process::{Command, Output};

fn rowfollow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rowfollow")).args(args).output().unwrap()
}

fn write_scenario(dir: &Path, length: f64) -> String {
    let path = dir.join("short.json");
    std::fs::write(&path, rowfollow_sim::FieldSpec::straight(length).to_json()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_then_replay_report_the_same_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), 8.0);
    let log = dir.path().join("run.jsonl");
    let log = log.to_str().unwrap();
    let run = rowfollow(&["run", &scenario, "--mode", "PL+EKF", "--seed", "3", "--out", log]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(summary["scenario_id"], "short");
    assert_eq!(summary["relevant_interventions"], 0);
    assert_eq!(summary["intervention_counts"]["end_of_lane"], 1);

    let again = rowfollow(&["replay", log]);
    assert!(again.status.success());
    assert_eq!(again.stdout, run.stdout);

    let mismatch = rowfollow(&["replay", log, "--mode", "PL", "--format", "csv"]);
    assert!(mismatch.status.success());
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("mode"));
    assert!(String::from_utf8_lossy(&mismatch.stdout).starts_with("scenario,mode,seed"));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), 5.0);
    assert_eq!(rowfollow(&["run", &scenario, "--set", "pid.nope=1"]).status.code(), Some(2));
    assert_eq!(rowfollow(&["run", &scenario, "--set", "lidar.rate_hz=7"]).status.code(), Some(2));
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[pid]\nkp = \"fast\"\n").unwrap();
    assert_eq!(rowfollow(&["run", &scenario, "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    let spec = dir.path().join("curvy.json");
    let mut bad = rowfollow_sim::FieldSpec::straight(20.0);
    bad.curve = Some(rowfollow_sim::CurveSpec { radius_m: 2.0, arc_start_m: 5.0, arc_length_m: 5.0 });
    std::fs::write(&spec, bad.to_json()).unwrap();
    assert_eq!(rowfollow(&["run", spec.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn parse_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("broken.json");
    std::fs::write(&scenario, "{\"row_spacing\": ").unwrap();
    assert_eq!(rowfollow(&["run", scenario.to_str().unwrap()]).status.code(), Some(3));

    let log = dir.path().join("run.jsonl");
    let ok = rowfollow(&["run", &write_scenario(dir.path(), 3.0), "--out", log.to_str().unwrap()]);
    assert!(ok.status.success());
    let text = std::fs::read_to_string(&log).unwrap();
    std::fs::write(&log, &text[..text.len() - 20]).unwrap();
    let out = rowfollow(&["replay", log.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let lines = text.lines().count();
    assert!(String::from_utf8_lossy(&out.stderr).contains(&format!("line {lines}")));
}

#[test]
fn help_documents_every_config_key() {
    let out = rowfollow(&["--help"]);
    assert!(out.status.success());
    let help = String::from_utf8_lossy(&out.stdout);
    for key in ["roi.forward_min", "validate.max_stale_age", "ekf.q_diag", "goal.phi_r_max", "pid.kp", "drive.v_x", "sim.tick_hz"] {
        assert!(help.contains(key), "--help is missing {key}");
    }
}

#[test]
fn sweep_and_compare_emit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), 4.0);
    let sweep = rowfollow(&["sweep", &scenario, "--rate-hz", "40,10", "--seeds", "2", "--format", "csv"]);
    assert!(sweep.status.success());
    assert_eq!(String::from_utf8_lossy(&sweep.stdout).lines().count(), 5);
    let compare = rowfollow(&["compare", &scenario, "--seeds", "2"]);
    assert!(compare.status.success());
    let report: serde_json::Value = serde_json::from_slice(&compare.stdout).unwrap();
    assert_eq!(report["pairs"].as_array().unwrap().len(), 2);
}
