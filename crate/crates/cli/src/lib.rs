//! Command-line driver: scenario loading, runs, CSV/JSON output and run summaries.

pub mod config;
pub mod report;

use std::path::{Path, PathBuf};

use facade_inspect::mission::{run_mission, MissionError, MissionOutput, MissionScope};
use facade_inspect::perception::captures_to_csv;
use facade_inspect::planner::generate_perimeter_path;
use thiserror::Error;

pub use config::ScenarioConfig;

pub const PLAN_FILE: &str = "plan.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const CAPTURES_FILE: &str = "captures.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("watchdog abort: {0}")]
    Watchdog(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Watchdog(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<MissionError> for CliError {
    fn from(e: MissionError) -> Self {
        match e {
            MissionError::Watchdog { .. } => CliError::Watchdog(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Flags shared by the run subcommands.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub set: Vec<String>,
}

/// Config file (or the built-in default), then `--set`, then `--seed`/`--out`, then validation.
pub fn resolve(opts: &RunOptions) -> Result<ScenarioConfig, CliError> {
    let base = match &opts.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    let mut cfg = base.with_overrides(&opts.set)?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &opts.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Write every file or none: each goes to a temporary name first and is
/// renamed once all of them are on disk.
pub fn write_outputs(dir: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    let io = |what: &str, p: &Path, e: std::io::Error| CliError::Io(format!("cannot {what} {}: {e}", p.display()));
    std::fs::create_dir_all(dir).map_err(|e| io("create", dir, e))?;
    let mut staged = Vec::new();
    for (name, body) in files {
        let tmp = dir.join(format!(".{name}.partial"));
        if let Err(e) = std::fs::write(&tmp, body) {
            for (t, _) in &staged {
                let _ = std::fs::remove_file(t);
            }
            let _ = std::fs::remove_file(&tmp);
            return Err(io("write", &tmp, e));
        }
        staged.push((tmp, dir.join(name)));
    }
    for (tmp, dst) in &staged {
        std::fs::rename(tmp, dst).map_err(|e| io("rename into", dst, e))?;
    }
    Ok(())
}

fn plan_csv(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let building = cfg.scene.building.ok_or_else(|| CliError::Config("scene has no building".into()))?;
    let path = generate_perimeter_path(&building, &cfg.mission.plan, &cfg.mission.home())
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(path.to_csv())
}

pub fn cmd_plan(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let csv = plan_csv(cfg)?;
    let rows = csv.lines().count().saturating_sub(1);
    write_outputs(&cfg.out, &[(PLAN_FILE, csv)])?;
    Ok(format!("plan: {rows} waypoints -> {}", cfg.out.join(PLAN_FILE).display()))
}

fn run(cfg: &ScenarioConfig, scope: MissionScope) -> Result<MissionOutput, CliError> {
    Ok(run_mission(&cfg.scene, &cfg.mission, cfg.seed, scope)?)
}

pub fn cmd_inspect(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let out = run(cfg, MissionScope::InspectionOnly)?;
    write_outputs(
        &cfg.out,
        &[
            (PLAN_FILE, out.plan.to_csv()),
            (TRAJECTORY_FILE, out.trajectory_csv()),
            (CAPTURES_FILE, captures_to_csv(&out.captures)),
        ],
    )?;
    let r = &out.report;
    Ok(format!(
        "inspect seed {}: {:.2} s, {} captures ({} crack), {} faults -> {}",
        cfg.seed,
        r.inspection_duration,
        r.capture_count,
        r.crack_capture_count,
        r.faults.len(),
        cfg.out.display()
    ))
}

pub fn report_json(out: &MissionOutput) -> Result<String, CliError> {
    serde_json::to_string_pretty(&out.report)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Io(format!("cannot encode report: {e}")))
}

pub fn cmd_mission(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let out = run(cfg, MissionScope::Full)?;
    write_outputs(
        &cfg.out,
        &[
            (PLAN_FILE, out.plan.to_csv()),
            (TRAJECTORY_FILE, out.trajectory_csv()),
            (CAPTURES_FILE, captures_to_csv(&out.captures)),
            (REPORT_FILE, report_json(&out)?),
        ],
    )?;
    let r = &out.report;
    Ok(format!(
        "mission seed {}: {:.2} s, {} captures ({} crack), {} faults revisited -> {}",
        cfg.seed,
        r.total_duration,
        r.capture_count,
        r.crack_capture_count,
        r.faults.len(),
        cfg.out.display()
    ))
}
