//! Summaries of a finished run directory.

use std::fmt::Write as _;
use std::path::Path;

use facade_inspect::mission::TRAJECTORY_CSV_HEADER;
use facade_inspect::perception::CAPTURE_CSV_HEADER;
use serde::Deserialize;

use crate::{CliError, CAPTURES_FILE, REPORT_FILE, TRAJECTORY_FILE};

/// Errors below this are treated as zero when forming the DR / Kalman ratio.
pub const ZERO_ERROR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorStats {
    pub max: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FaultEntry {
    pub id: usize,
    pub image_id: String,
    pub capture_time: f64,
    pub position: [f64; 3],
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
struct ReportFile {
    faults: Vec<FaultEntry>,
    min_obstacle_clearance: Option<f64>,
    #[serde(default)]
    noiseless_sensors: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rows: usize,
    pub dead_reckoning: ErrorStats,
    pub kalman: ErrorStats,
    pub captures: usize,
    pub crack_captures: usize,
    /// `None` for inspection-only runs, which write no report.
    pub faults: Option<Vec<FaultEntry>>,
    pub min_clearance: Option<f64>,
    /// From the report; the leftover error of such a run is integration
    /// mismatch, not sensor noise.
    pub noiseless: bool,
}

impl RunSummary {
    /// DR max error over Kalman max error; `None` for noiseless runs and when
    /// either error is numerically zero.
    pub fn ratio(&self) -> Option<f64> {
        if self.noiseless || self.kalman.max < ZERO_ERROR || self.dead_reckoning.max < ZERO_ERROR {
            None
        } else {
            Some(self.dead_reckoning.max / self.kalman.max)
        }
    }
}

fn reader(path: &Path, header: &str) -> Result<csv::Reader<std::fs::File>, CliError> {
    let mut rdr =
        csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let found = rdr
        .headers()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != header {
        return Err(CliError::Io(format!("{}: unexpected header `{found}`", path.display())));
    }
    Ok(rdr)
}

fn stats(sq_errors: &[f64]) -> ErrorStats {
    if sq_errors.is_empty() {
        return ErrorStats::default();
    }
    let max = sq_errors.iter().copied().fold(0.0, f64::max).sqrt();
    let rms = (sq_errors.iter().sum::<f64>() / sq_errors.len() as f64).sqrt();
    ErrorStats { max, rms }
}

pub fn summarize(dir: &Path) -> Result<RunSummary, CliError> {
    let traj = dir.join(TRAJECTORY_FILE);
    if !traj.is_file() {
        return Err(CliError::Io(format!("no run found in {} (missing {TRAJECTORY_FILE})", dir.display())));
    }
    let bad = |p: &Path, line: usize, e: &dyn std::fmt::Display| CliError::Io(format!("{}:{line}: {e}", p.display()));

    let mut dr_sq = Vec::new();
    let mut kf_sq = Vec::new();
    for (i, rec) in reader(&traj, TRAJECTORY_CSV_HEADER)?.records().enumerate() {
        let rec = rec.map_err(|e| bad(&traj, i + 2, &e))?;
        let v: Vec<f64> = (1..10)
            .map(|k| rec.get(k).unwrap_or("").parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(&traj, i + 2, &e))?;
        let sq = |o: usize| (0..3).map(|a| (v[o + a] - v[a]).powi(2)).sum::<f64>();
        kf_sq.push(sq(3));
        dr_sq.push(sq(6));
    }

    let caps = dir.join(CAPTURES_FILE);
    let (mut captures, mut crack_captures) = (0, 0);
    if caps.is_file() {
        for (i, rec) in reader(&caps, CAPTURE_CSV_HEADER)?.records().enumerate() {
            let rec = rec.map_err(|e| bad(&caps, i + 2, &e))?;
            captures += 1;
            if rec.get(9) == Some("crack") {
                crack_captures += 1;
            }
        }
    }

    let rep = dir.join(REPORT_FILE);
    let (faults, min_clearance, noiseless) = if rep.is_file() {
        let text =
            std::fs::read_to_string(&rep).map_err(|e| CliError::Io(format!("cannot read {}: {e}", rep.display())))?;
        let r: ReportFile = serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", rep.display())))?;
        (Some(r.faults), r.min_obstacle_clearance, r.noiseless_sensors)
    } else {
        (None, None, false)
    };

    Ok(RunSummary {
        rows: kf_sq.len(),
        dead_reckoning: stats(&dr_sq),
        kalman: stats(&kf_sq),
        captures,
        crack_captures,
        faults,
        min_clearance,
        noiseless,
    })
}

pub fn render(dir: &Path, s: &RunSummary) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "run: {} ({} trajectory rows)", dir.display(), s.rows);
    let _ = writeln!(o, "dead-reckoning error: max {:.6} m, rms {:.6} m", s.dead_reckoning.max, s.dead_reckoning.rms);
    let _ = writeln!(o, "kalman error: max {:.6} m, rms {:.6} m", s.kalman.max, s.kalman.rms);
    match s.ratio() {
        Some(r) => writeln!(o, "dr/kalman max ratio: {r:.1}"),
        None => writeln!(o, "dr/kalman max ratio: n/a"),
    }
    .ok();
    match s.min_clearance {
        Some(c) => writeln!(o, "min obstacle clearance: {c:.3} m"),
        None => writeln!(o, "min obstacle clearance: n/a"),
    }
    .ok();
    let _ = writeln!(o, "captures: {} ({} crack)", s.captures, s.crack_captures);
    match &s.faults {
        None => {
            let _ = writeln!(o, "faults: n/a (no {REPORT_FILE})");
        }
        Some(faults) => {
            let _ = writeln!(o, "faults: {}", faults.len());
            for f in faults {
                let [x, y, z] = f.position;
                let _ = writeln!(
                    o,
                    "  #{} {} t={:.2} s at ({x:.3}, {y:.3}, {z:.3}) yaw {:.1} deg",
                    f.id,
                    f.image_id,
                    f.capture_time,
                    f.yaw.to_degrees()
                );
            }
        }
    }
    o
}

pub fn cmd_report(dir: &Path) -> Result<String, CliError> {
    let s = summarize(dir)?;
    Ok(render(dir, &s))
}
