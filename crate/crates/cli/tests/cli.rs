use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use facade_inspect::mission::TRAJECTORY_CSV_HEADER;
use facade_inspect::perception::CAPTURE_CSV_HEADER;
use facade_inspect_cli::ScenarioConfig;

fn bin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_facade-inspect")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn report(dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_facade-inspect")).arg("report").arg(dir).output().expect("binary runs")
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap_or("").to_string()
}

fn stderr_line(o: &Output) -> String {
    let s = String::from_utf8_lossy(&o.stderr).to_string();
    assert_eq!(s.trim_end().lines().count(), 1, "diagnostic should be one line: {s}");
    s
}

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn plan_writes_only_the_plan() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("p");
    let o = bin(&["plan"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(first_line(&out.join("plan.csv")), "layer,x_m,y_m,z_m,yaw_rad");
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 1);
}

#[test]
fn inspect_writes_three_csvs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("i");
    let o = bin(&["inspect", "--seed", "3"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(first_line(&out.join("captures.csv")), CAPTURE_CSV_HEADER);
    assert_eq!(first_line(&out.join("trajectory.csv")), TRAJECTORY_CSV_HEADER);
    assert!(out.join("plan.csv").is_file());
    assert!(!out.join("report.json").exists());
    let r = report(&out);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stdout).contains("faults: n/a"));
}

#[test]
fn mission_report_shows_the_filter_gain() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m");
    let o = bin(&["mission"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["faults"].as_array().unwrap().len(), 4);

    let r = report(&out);
    assert!(r.status.success());
    let text = String::from_utf8_lossy(&r.stdout);
    let ratio: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("dr/kalman max ratio: "))
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| panic!("no numeric ratio in\n{text}"));
    assert!(ratio >= 50.0, "ratio {ratio}");
    assert!(text.contains("faults: 4"));
}

#[test]
fn noiseless_mission_has_no_ratio() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("quiet");
    let o = bin(
        &[
            "mission",
            "--set",
            "mission.imu.gyro_noise_std=0",
            "--set",
            "mission.imu.accel_noise_std=0",
            "--set",
            "mission.imu.mag_noise_std=0",
            "--set",
            "mission.imu.gyro_bias=[0, 0, 0]",
            "--set",
            "mission.imu.accel_bias=[0, 0, 0]",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = facade_inspect_cli::report::summarize(&out).unwrap();
    assert!(s.kalman.max < 0.1 && s.dead_reckoning.max < 0.1, "{s:?}");
    assert!(String::from_utf8_lossy(&report(&out).stdout).contains("ratio: n/a"));
}

#[test]
fn invalid_config_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    for args in [
        &["inspect", "--set", "scene.building.length=-20"][..],
        &["mission", "--set", "mission.pid.kpp=1"][..],
        &["plan", "--set", "mission.dt=0"][..],
    ] {
        let o = bin(args, &out);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        stderr_line(&o);
        assert!(!out.exists(), "{args:?} left output behind");
    }
}

#[test]
fn watchdog_exits_3_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("wd");
    let o = bin(&["mission", "--set", "mission.watchdog=1"], &out);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr_line(&o).contains("watchdog"));
    assert!(!out.exists());
}

#[test]
fn missing_config_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin(&["inspect", "--config", tmp.path().join("nope.toml").to_str().unwrap()], &tmp.path().join("x"));
    assert_eq!(o.status.code(), Some(4));
    stderr_line(&o);
}

#[test]
fn malformed_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[mission]\ndt = \"fast\"\n").unwrap();
    let o = bin(&["plan", "--config", cfg.to_str().unwrap()], &tmp.path().join("x"));
    assert_eq!(o.status.code(), Some(2));
    stderr_line(&o);
}

#[test]
fn report_on_an_empty_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let o = report(tmp.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr_line(&o).contains("no run found"));
}

#[test]
fn shipped_scenarios_round_trip() {
    let mut seen = 0;
    for entry in std::fs::read_dir(scenario_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let cfg = ScenarioConfig::load(&path).unwrap();
        cfg.validate().unwrap();
        let text = cfg.to_toml().unwrap();
        let again = ScenarioConfig::from_toml(&text).unwrap();
        assert_eq!(again, cfg, "{}", path.display());
        assert_eq!(again.to_toml().unwrap(), text);
        seen += 1;
    }
    assert!(seen >= 2);
}

#[test]
fn obstacle_scenario_runs_from_its_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("obs");
    let cfg = scenario_dir().join("obstacle_course.toml");
    let o = bin(&["mission", "--config", cfg.to_str().unwrap(), "--seed", "2"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = facade_inspect_cli::report::summarize(&out).unwrap();
    assert!(s.min_clearance.unwrap() > 0.5);
}
