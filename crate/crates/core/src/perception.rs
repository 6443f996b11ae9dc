//! Timed image captures stamped with the estimated pose, crack classification
//! and the crack-coordinate filter that seeds the detection flights.

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SpecError;
use crate::fmt_sig9;

pub const CAPTURE_CSV_HEADER: &str = "image_id,t_s,x_m,y_m,z_m,qw,qx,qy,qz,label";

/// Slack for clocks built from accumulated steps.
const CLOCK_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Crack,
    NotCrack,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Crack => "crack",
            Label::NotCrack => "not_crack",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Crack => Label::NotCrack,
            Label::NotCrack => Label::Crack,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureRecord {
    pub image_id: String,
    pub time: f64,
    pub est_position: Vector3<f64>,
    pub est_quat: UnitQuaternion<f64>,
    pub est_yaw: f64,
    /// Ground truth for scoring; never written to the CSV.
    pub visible_decals: Vec<u32>,
    pub label: Label,
}

pub fn image_id(index: u64) -> String {
    format!("img_{index:06}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Oracle,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub accuracy: f64,
    #[serde(skip)]
    pub seed: u64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self { kind: ClassifierKind::Oracle, accuracy: 0.95, seed: 0 }
    }
}

impl ClassifierSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if !(0.0..=1.0).contains(&self.accuracy) {
            return Err(SpecError::invalid("classifier accuracy must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// True when a capture is due: `clock - last_capture >= interval`, or always
/// when nothing has been captured yet.
pub fn capture_tick(clock: f64, last_capture: Option<f64>, interval: f64) -> bool {
    assert!(interval > 0.0, "capture interval must be positive");
    match last_capture {
        None => true,
        Some(last) => clock - last >= interval - CLOCK_EPS,
    }
}

/// Capture clock on a fixed grid: after a capture the next one is due one
/// interval after the scheduled time, not the actual one, so the cadence does
/// not slip by a step each period.
#[derive(Debug, Clone)]
pub struct CaptureScheduler {
    interval: f64,
    last: Option<f64>,
}

impl CaptureScheduler {
    pub fn new(interval: f64) -> Self {
        assert!(interval > 0.0, "capture interval must be positive");
        Self { interval, last: None }
    }

    pub fn poll(&mut self, clock: f64) -> bool {
        if !capture_tick(clock, self.last, self.interval) {
            return false;
        }
        self.last = Some(match self.last {
            None => clock,
            Some(last) => last + self.interval,
        });
        true
    }
}

/// Crack/not-crack labeller standing in for the image classifier.
#[derive(Debug, Clone)]
pub struct Classifier {
    spec: ClassifierSpec,
    rng: ChaCha8Rng,
}

impl Classifier {
    pub const STREAM: u64 = 3;

    pub fn new(spec: ClassifierSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(Self::STREAM);
        Self { spec, rng }
    }

    pub fn classify(&mut self, visible_decals: &[u32]) -> Label {
        let truth = if visible_decals.is_empty() { Label::NotCrack } else { Label::Crack };
        match self.spec.kind {
            ClassifierKind::Oracle => truth,
            ClassifierKind::Noisy => {
                if self.rng.random::<f64>() < self.spec.accuracy {
                    truth
                } else {
                    truth.flipped()
                }
            }
        }
    }
}

/// A deduplicated crack location: the pose of the earliest capture in its cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultCandidate {
    pub image_id: String,
    pub time: f64,
    pub position: Vector3<f64>,
    pub yaw: f64,
}

/// Crack-labelled capture poses, collapsing any record within `merge_radius`
/// of an already kept one onto the earlier record.
pub fn filter_fault_coordinates(records: &[CaptureRecord], merge_radius: f64) -> Vec<FaultCandidate> {
    let mut kept: Vec<FaultCandidate> = Vec::new();
    let mut cracks: Vec<&CaptureRecord> = records.iter().filter(|r| r.label == Label::Crack).collect();
    cracks.sort_by(|a, b| a.time.total_cmp(&b.time));
    for r in cracks {
        if kept.iter().any(|k| (k.position - r.est_position).norm() <= merge_radius) {
            continue;
        }
        kept.push(FaultCandidate {
            image_id: r.image_id.clone(),
            time: r.time,
            position: r.est_position,
            yaw: r.est_yaw,
        });
    }
    kept
}

pub fn capture_csv_row(r: &CaptureRecord) -> String {
    let q = r.est_quat.quaternion();
    let p = &r.est_position;
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.image_id,
        fmt_sig9(r.time),
        fmt_sig9(p.x),
        fmt_sig9(p.y),
        fmt_sig9(p.z),
        fmt_sig9(q.w),
        fmt_sig9(q.i),
        fmt_sig9(q.j),
        fmt_sig9(q.k),
        r.label.as_str()
    )
}

pub fn captures_to_csv(records: &[CaptureRecord]) -> String {
    let mut out = String::from(CAPTURE_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&capture_csv_row(r));
        out.push('\n');
    }
    out
}
