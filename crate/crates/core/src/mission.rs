//! Two-phase mission: inspection (fly the layered rings, capture, return
//! home) then detection (revisit every crack capture pose, hold, return).

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attitude::{AttitudeEstimate, ComplementaryFilter, ComplementaryGain};
use crate::control::{classify_sectors, Controller, PidGains, TrackingParams};
use crate::error::SpecError;
use crate::estimation::{world_accel, DeadReckoner, KalmanConfig, KalmanError, MotionModel, PositionEstimator};
use crate::fmt_sig9;
use crate::perception::{
    filter_fault_coordinates, image_id, CaptureRecord, CaptureScheduler, Classifier, ClassifierSpec,
};
use crate::planner::{
    avoidance_polygon, facade_facing_yaw, flight_ring, generate_perimeter_path, plan_return_path, PlanParams, Waypoint,
    WaypointKind, WaypointPath,
};
use crate::sensors::{Imu, ImuId, ImuNoiseSpec};
use crate::vehicle::{step_dynamics, TrueState, VehicleParams, VelocityCommand};
use crate::world::{simulate_scan, visible_decals, CameraModel, Rect, ScanConfig, Scene};

pub const TRAJECTORY_CSV_HEADER: &str = "t_s,true_x,true_y,true_z,est_x,est_y,est_z,dr_x,dr_y,dr_z,phase";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissionPhase {
    Idle,
    Inspecting,
    ReturningHome,
    Detecting(usize),
    Holding,
    Done,
}

impl fmt::Display for MissionPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MissionPhase::Idle => f.write_str("idle"),
            MissionPhase::Inspecting => f.write_str("inspecting"),
            MissionPhase::ReturningHome => f.write_str("returning_home"),
            MissionPhase::Detecting(i) => write!(f, "detecting_{i}"),
            MissionPhase::Holding => f.write_str("holding"),
            MissionPhase::Done => f.write_str("done"),
        }
    }
}

/// Allowed phase changes. Besides the main sequence, a hold may lead to the
/// final return home and a return home may end the mission.
pub fn is_legal_transition(from: MissionPhase, to: MissionPhase) -> bool {
    use MissionPhase::*;
    matches!(
        (from, to),
        (Idle, Inspecting)
            | (Inspecting, ReturningHome)
            | (ReturningHome, Detecting(_))
            | (ReturningHome, Done)
            | (Detecting(_), Holding)
            | (Holding, Detecting(_))
            | (Holding, ReturningHome)
            | (Holding, Done)
    )
}

/// Process, measurement and initial covariance diagonals for each axis filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterParams {
    pub q: [f64; 3],
    /// Defaults to the accelerometer noise variance when absent.
    pub r: Option<[f64; 2]>,
    pub p0: [f64; 3],
    pub model: MotionModel,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            q: [1e-6, 1e-9, 1e-2],
            r: None,
            p0: [1e-4, 1e-4, 1e-2],
            model: MotionModel::VelocityTracking { tau: VehicleParams::default().tau },
        }
    }
}

impl FilterParams {
    /// Smallest variance used when the accelerometer is noiseless, keeping R invertible.
    const R_FLOOR: f64 = 1e-8;

    pub fn kalman_config(&self, imu: &ImuNoiseSpec) -> KalmanConfig {
        let var = (imu.accel_noise_std * imu.accel_noise_std).max(Self::R_FLOOR);
        KalmanConfig::from_diagonals(self.q, self.r.unwrap_or([var, var]), self.p0, self.model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionParams {
    pub dt: f64,
    pub arrival_tol: f64,
    pub hold_time: f64,
    pub watchdog: f64,
    pub capture_interval: f64,
    pub merge_radius: f64,
    pub d_engage: f64,
    pub home: [f64; 3],
    /// Every n-th step goes to the trajectory CSV.
    pub trajectory_stride: usize,
    pub plan: PlanParams,
    pub vehicle: VehicleParams,
    pub pid: PidGains,
    pub tracking: TrackingParams,
    pub imu: ImuNoiseSpec,
    pub alpha: ComplementaryGain,
    pub kalman: FilterParams,
    pub classifier: ClassifierSpec,
    pub camera: CameraModel,
    pub scan: ScanConfig,
}

impl Default for MissionParams {
    fn default() -> Self {
        Self {
            dt: 0.01,
            arrival_tol: 0.3,
            hold_time: 5.0,
            watchdog: 120.0,
            capture_interval: 10.0,
            merge_radius: 2.0,
            d_engage: 3.0,
            home: [0.0, -22.0, 0.0],
            trajectory_stride: 10,
            plan: PlanParams::default(),
            vehicle: VehicleParams::default(),
            pid: PidGains::default(),
            tracking: TrackingParams::default(),
            imu: ImuNoiseSpec::default(),
            alpha: ComplementaryGain::default(),
            kalman: FilterParams::default(),
            classifier: ClassifierSpec::default(),
            camera: CameraModel::default(),
            scan: ScanConfig::default(),
        }
    }
}

impl MissionParams {
    pub fn validate(&self) -> Result<(), SpecError> {
        let positive = [
            ("dt", self.dt),
            ("arrival_tol", self.arrival_tol),
            ("watchdog", self.watchdog),
            ("capture_interval", self.capture_interval),
            ("d_engage", self.d_engage),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SpecError::invalid(format!("{name} must be a positive number")));
            }
        }
        if !(self.hold_time >= 0.0) || !(self.merge_radius >= 0.0) {
            return Err(SpecError::invalid("hold_time and merge_radius must be >= 0"));
        }
        if self.home.iter().any(|c| !c.is_finite()) || self.home[2] < 0.0 {
            return Err(SpecError::invalid("home must be finite with z >= 0"));
        }
        if self.trajectory_stride == 0 {
            return Err(SpecError::invalid("trajectory_stride must be >= 1"));
        }
        if !(self.tracking.v_max > 0.0) || !(self.tracking.yaw_rate_max > 0.0) || !(self.tracking.yaw_kp >= 0.0) {
            return Err(SpecError::invalid("tracking limits must be positive"));
        }
        self.plan.validate()?;
        self.vehicle.validate()?;
        self.pid.validate()?;
        self.imu.validate()?;
        self.classifier.validate()?;
        self.camera.validate()?;
        self.scan.validate()?;
        self.kalman.kalman_config(&self.imu).validate()
    }

    pub fn home(&self) -> Vector3<f64> {
        Vector3::from(self.home)
    }
}

#[derive(Debug, Error)]
pub enum MissionError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Estimator(#[from] KalmanError),
    #[error(
        "watchdog: waypoint {waypoint} ({kind:?}) of phase {phase} not reached within {limit} s \
         (t = {time:.2} s, estimated distance {distance:.3} m)"
    )]
    Watchdog { phase: MissionPhase, waypoint: usize, kind: WaypointKind, time: f64, limit: f64, distance: f64 },
    #[error("a scene with a building is required for a mission")]
    NoBuilding,
}

/// Estimated pose at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub quat: UnitQuaternion<f64>,
    pub yaw: f64,
    pub dead_reckoned: Vector3<f64>,
}

/// Sensors plus the attitude, Kalman and dead-reckoning chain. Only reads the
/// true state through the IMUs.
#[derive(Debug, Clone)]
pub struct Estimator {
    imu_1: Imu,
    imu_2: Imu,
    attitude: ComplementaryFilter,
    position: PositionEstimator,
    dr: DeadReckoner,
}

impl Estimator {
    pub fn new(params: &MissionParams, seed: u64, start: &TrueState) -> Self {
        let spec = ImuNoiseSpec { seed, ..params.imu };
        let (roll, pitch, yaw) = start.attitude.euler_angles();
        Self {
            imu_1: Imu::new(ImuId::One, spec),
            imu_2: Imu::new(ImuId::Two, spec),
            attitude: ComplementaryFilter::new(
                params.alpha,
                AttitudeEstimate::from_euler(roll, pitch, yaw, start.time),
            ),
            position: PositionEstimator::new(params.kalman.kalman_config(&params.imu), start.position, start.velocity),
            dr: DeadReckoner::new(start.position, start.velocity),
        }
    }

    /// Sample both IMUs at `truth` and run one estimation cycle. `command` is
    /// the world-frame velocity command applied over the step just finished.
    pub fn update(&mut self, truth: &TrueState, command: &Vector3<f64>, dt: f64) -> Result<Estimate, KalmanError> {
        let s1 = self.imu_1.sample(truth);
        let s2 = self.imu_2.sample(truth);
        let expected = self.position.predict(command, dt);
        let att = *self.attitude.update_aided(&s1, dt, &expected);
        let a1 = world_accel(&s1, &att);
        let a2 = world_accel(&s2, &att);
        self.position.correct(&a1, &a2)?;
        let dead_reckoned = self.dr.push(a1, dt);
        Ok(Estimate {
            position: self.position.position(),
            velocity: self.position.velocity(),
            quat: att.quat,
            yaw: att.yaw,
            dead_reckoned,
        })
    }
}

/// Everything recorded for one simulation step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub t: f64,
    pub true_position: Vector3<f64>,
    pub true_yaw: f64,
    pub est_position: Vector3<f64>,
    pub est_yaw: f64,
    pub dr_position: Vector3<f64>,
    pub phase: MissionPhase,
    pub avoiding: bool,
    /// Nearest masked scan return below the engage distance.
    pub engaged_range: Option<f64>,
    /// Nearest masked scan return in any direction.
    pub min_masked_range: f64,
    /// Ground-truth distance to the nearest obstacle surface.
    pub obstacle_clearance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaultReport {
    pub id: usize,
    pub image_id: String,
    pub capture_time: f64,
    pub position: [f64; 3],
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissionReport {
    pub seed: u64,
    pub faults: Vec<FaultReport>,
    pub inspection_duration: f64,
    pub detection_durations: Vec<f64>,
    pub total_duration: f64,
    pub capture_count: usize,
    pub crack_capture_count: usize,
    /// `None` when the scene has no obstacles.
    pub min_obstacle_clearance: Option<f64>,
    pub dr_max_error: f64,
    pub dr_rms_error: f64,
    pub kalman_max_error: f64,
    pub kalman_rms_error: f64,
    /// Both IMUs ran without noise or bias.
    pub noiseless_sensors: bool,
}

/// One detection flight and the hold at its end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionLeg {
    pub fault: usize,
    pub target: Vector3<f64>,
    pub target_yaw: f64,
    pub start_time: f64,
    pub arrival_time: f64,
    pub end_time: f64,
    pub end_true_position: Vector3<f64>,
    pub end_true_yaw: f64,
    pub end_est_position: Vector3<f64>,
}

#[derive(Debug, Clone)]
pub struct MissionOutput {
    pub report: MissionReport,
    pub plan: WaypointPath,
    pub captures: Vec<CaptureRecord>,
    pub steps: Vec<StepLog>,
    pub phases: Vec<(f64, MissionPhase)>,
    pub legs: Vec<DetectionLeg>,
    pub trajectory_stride: usize,
}

impl MissionOutput {
    pub fn trajectory_csv(&self) -> String {
        trajectory_csv(&self.steps, self.trajectory_stride)
    }
}

pub fn trajectory_csv(steps: &[StepLog], stride: usize) -> String {
    let mut out = String::from(TRAJECTORY_CSV_HEADER);
    out.push('\n');
    let stride = stride.max(1);
    let last = steps.len().saturating_sub(1);
    for (i, s) in steps.iter().enumerate() {
        if i % stride != 0 && i != last {
            continue;
        }
        let cols = [s.true_position, s.est_position, s.dr_position]
            .iter()
            .flat_map(|v| v.iter().map(|c| fmt_sig9(*c)).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!("{},{},{}\n", fmt_sig9(s.t), cols, s.phase));
    }
    out
}

/// Which phases of the mission to fly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissionScope {
    InspectionOnly,
    Full,
}

enum Task {
    Fly { phase: MissionPhase, path: Vec<Waypoint>, next: usize, since: f64 },
    Hold { wp: Waypoint, until: Option<f64>, fault: usize },
}

#[derive(PartialEq)]
enum Stage {
    Inspection,
    Detection { faults: Vec<(Vector3<f64>, f64)>, next: usize },
    Homebound,
    Finished,
}

struct Sim<'a> {
    scene: &'a Scene,
    params: MissionParams,
    scope: MissionScope,
    mask: Rect,
    ring: Rect,
    facing_home: f64,
    k: u64,
    truth: TrueState,
    estimator: Estimator,
    est: Estimate,
    command_world: Vector3<f64>,
    controller: Controller,
    scheduler: CaptureScheduler,
    classifier: Classifier,
    phase: MissionPhase,
    phases: Vec<(f64, MissionPhase)>,
    tasks: VecDeque<Task>,
    stage: Stage,
    captures: Vec<CaptureRecord>,
    steps: Vec<StepLog>,
    legs: Vec<DetectionLeg>,
    faults: Vec<FaultReport>,
    inspection_duration: Option<f64>,
}

impl Sim<'_> {
    fn t(&self) -> f64 {
        self.k as f64 * self.params.dt
    }

    fn set_phase(&mut self, phase: MissionPhase) {
        if phase != self.phase {
            debug_assert!(is_legal_transition(self.phase, phase), "{} -> {}", self.phase, phase);
            if self.phase == MissionPhase::Inspecting {
                self.inspection_duration = Some(self.t());
            }
            self.phase = phase;
            self.phases.push((self.t(), phase));
        }
    }

    fn capture(&mut self) {
        let visible = visible_decals(self.scene, &self.truth.position, self.truth.yaw(), &self.params.camera);
        let label = self.classifier.classify(&visible);
        self.captures.push(CaptureRecord {
            image_id: image_id(self.captures.len() as u64),
            time: self.t(),
            est_position: self.est.position,
            est_quat: self.est.quat,
            est_yaw: self.est.yaw,
            visible_decals: visible,
            label,
        });
    }

    /// Path from the current estimate to `(target, yaw)`, around the building.
    fn leg_to(&self, target: &Vector3<f64>, yaw: f64) -> Vec<Waypoint> {
        plan_return_path(&self.est.position, target, yaw, Some((&self.mask, &self.ring))).waypoints
    }

    fn home_path(&self) -> Vec<Waypoint> {
        let home = self.params.home();
        let above = Vector3::new(home.x, home.y, self.est.position.z);
        let mut path = self.leg_to(&above, self.facing_home);
        path.push(Waypoint { position: home, yaw: self.facing_home, layer: 0, kind: WaypointKind::ReturnHome });
        path
    }

    /// Queue the next stage once the current one has run out of tasks.
    fn refill(&mut self) {
        let t = self.t();
        match std::mem::replace(&mut self.stage, Stage::Finished) {
            Stage::Inspection => {
                let faults = filter_fault_coordinates(&self.captures, self.params.merge_radius);
                self.faults = faults
                    .iter()
                    .enumerate()
                    .map(|(id, f)| FaultReport {
                        id,
                        image_id: f.image_id.clone(),
                        capture_time: f.time,
                        position: f.position.into(),
                        yaw: f.yaw,
                    })
                    .collect();
                if self.scope == MissionScope::InspectionOnly {
                    return;
                }
                let faults = faults.into_iter().map(|f| (f.position, f.yaw)).collect();
                self.stage = Stage::Detection { faults, next: 0 };
                self.refill();
            }
            Stage::Detection { faults, next } => {
                if next < faults.len() {
                    let (target, yaw) = faults[next];
                    let path = self.leg_to(&target, yaw);
                    let wp = *path.last().expect("return path ends at its target");
                    self.tasks.push_back(Task::Fly {
                        phase: MissionPhase::Detecting(next),
                        path,
                        next: 0,
                        since: f64::NAN,
                    });
                    self.tasks.push_back(Task::Hold { wp, until: None, fault: next });
                    self.legs.push(DetectionLeg {
                        fault: next,
                        target,
                        target_yaw: yaw,
                        start_time: t,
                        arrival_time: f64::NAN,
                        end_time: f64::NAN,
                        end_true_position: Vector3::zeros(),
                        end_true_yaw: f64::NAN,
                        end_est_position: Vector3::zeros(),
                    });
                    self.stage = Stage::Detection { faults, next: next + 1 };
                } else if faults.is_empty() {
                    self.stage = Stage::Finished;
                } else {
                    let path = self.home_path();
                    self.tasks.push_back(Task::Fly {
                        phase: MissionPhase::ReturningHome,
                        path,
                        next: 0,
                        since: f64::NAN,
                    });
                    self.stage = Stage::Homebound;
                }
            }
            Stage::Homebound | Stage::Finished => self.stage = Stage::Finished,
        }
    }

    /// Advance the task queue against the current estimate. Returns the
    /// waypoint to steer at, or `None` when the mission is over.
    fn active_waypoint(&mut self) -> Result<Option<Waypoint>, MissionError> {
        loop {
            let t = self.t();
            if self.tasks.is_empty() {
                self.refill();
                if self.tasks.is_empty() {
                    return Ok(None);
                }
            }
            let est = self.est;
            let (tol, watchdog, hold) = (self.params.arrival_tol, self.params.watchdog, self.params.hold_time);
            match self.tasks.front_mut().expect("queue refilled") {
                Task::Fly { phase, path, next, since } => {
                    let phase = *phase;
                    if since.is_nan() {
                        *since = t;
                    }
                    while *next < path.len() && (path[*next].position - est.position).norm() < tol {
                        *next += 1;
                        *since = t;
                    }
                    if *next < path.len() {
                        let wp = path[*next];
                        let (idx, since) = (*next, *since);
                        if self.phase != phase {
                            self.set_phase(phase);
                        }
                        if t - since > watchdog {
                            return Err(MissionError::Watchdog {
                                phase,
                                waypoint: idx,
                                kind: wp.kind,
                                time: t,
                                limit: watchdog,
                                distance: (wp.position - est.position).norm(),
                            });
                        }
                        if idx > 0 && since == t {
                            self.controller.reset_tracking();
                        }
                        return Ok(Some(wp));
                    }
                    self.controller.reset_tracking();
                    self.tasks.pop_front();
                }
                Task::Hold { wp, until, fault } => {
                    let (wp, fault) = (*wp, *fault);
                    let end = *until.get_or_insert(t + hold);
                    if self.phase != MissionPhase::Holding {
                        self.set_phase(MissionPhase::Holding);
                        if let Some(leg) = self.legs.iter_mut().find(|l| l.fault == fault) {
                            leg.arrival_time = t;
                        }
                    }
                    if t < end - 1e-9 {
                        return Ok(Some(wp));
                    }
                    if let Some(leg) = self.legs.iter_mut().find(|l| l.fault == fault) {
                        leg.end_time = t;
                        leg.end_true_position = self.truth.position;
                        leg.end_true_yaw = self.truth.yaw();
                        leg.end_est_position = est.position;
                    }
                    self.tasks.pop_front();
                }
            }
        }
    }

    fn run(&mut self) -> Result<(), MissionError> {
        let dt = self.params.dt;
        loop {
            let t = self.t();
            self.truth.time = t;
            self.est = self.estimator.update(&self.truth, &self.command_world, dt)?;
            let was_inspecting = self.phase == MissionPhase::Inspecting;
            let wp = self.active_waypoint()?;
            if (was_inspecting || self.phase == MissionPhase::Inspecting) && self.scheduler.poll(t) {
                self.capture();
            }
            let Some(wp) = wp else {
                if self.phase == MissionPhase::Inspecting {
                    self.set_phase(MissionPhase::ReturningHome);
                }
                if self.scope == MissionScope::Full {
                    self.set_phase(MissionPhase::Done);
                }
                return Ok(());
            };

            let scan = simulate_scan(self.scene, &self.truth.position, self.truth.yaw(), &self.params.scan);
            let sectors =
                classify_sectors(&scan, Some(&self.mask), &self.est.position, self.est.yaw, self.params.d_engage);
            let min_masked_range =
                classify_sectors(&scan, Some(&self.mask), &self.est.position, self.est.yaw, f64::INFINITY)
                    .min_dist()
                    .unwrap_or(scan.range_max);
            let decision = self.controller.decide(&self.est.position, self.est.yaw, &wp, sectors, dt);
            let cmd: VelocityCommand = decision.command.saturate(&self.params.vehicle);
            self.steps.push(StepLog {
                t,
                true_position: self.truth.position,
                true_yaw: self.truth.yaw(),
                est_position: self.est.position,
                est_yaw: self.est.yaw,
                dr_position: self.est.dead_reckoned,
                phase: self.phase,
                avoiding: decision.avoiding,
                engaged_range: sectors.min_dist(),
                min_masked_range,
                obstacle_clearance: self.scene.obstacle_clearance(&self.truth.position),
            });
            self.command_world = cmd.world_velocity(self.est.yaw);
            self.truth = step_dynamics(&self.truth, &cmd, &self.params.vehicle, dt);
            self.k += 1;
        }
    }
}

fn error_stats(steps: &[StepLog], pick: impl Fn(&StepLog) -> Vector3<f64>) -> (f64, f64) {
    if steps.is_empty() {
        return (0.0, 0.0);
    }
    let errs: Vec<f64> = steps.iter().map(|s| (pick(s) - s.true_position).norm()).collect();
    let max = errs.iter().copied().fold(0.0, f64::max);
    let rms = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
    (max, rms)
}

/// Fly the mission over `scene`. The seed drives both IMUs and the classifier.
pub fn run_mission(
    scene: &Scene,
    params: &MissionParams,
    seed: u64,
    scope: MissionScope,
) -> Result<MissionOutput, MissionError> {
    scene.validate()?;
    params.validate()?;
    let building = scene.building.ok_or(MissionError::NoBuilding)?;
    let home = params.home();
    let plan = generate_perimeter_path(&building, &params.plan, &home)?;
    let facing_home = facade_facing_yaw(&building, &home.xy());
    let (inspection, homeward): (Vec<Waypoint>, Vec<Waypoint>) =
        plan.waypoints.iter().partition(|w| w.kind != WaypointKind::ReturnHome);

    let truth = TrueState::at_rest(home, facing_home);
    let estimator = Estimator::new(params, seed, &truth);
    let mut sim = Sim {
        scene,
        params: *params,
        scope,
        mask: avoidance_polygon(&building, &params.plan),
        ring: flight_ring(&building, &params.plan),
        facing_home,
        k: 0,
        truth,
        estimator,
        est: Estimate {
            position: home,
            velocity: Vector3::zeros(),
            quat: truth.attitude,
            yaw: facing_home,
            dead_reckoned: home,
        },
        command_world: Vector3::zeros(),
        controller: Controller::new(params.pid, params.tracking, params.d_engage),
        scheduler: CaptureScheduler::new(params.capture_interval),
        classifier: Classifier::new(ClassifierSpec { seed, ..params.classifier }),
        phase: MissionPhase::Idle,
        phases: vec![(0.0, MissionPhase::Idle)],
        tasks: VecDeque::new(),
        stage: Stage::Inspection,
        captures: Vec::new(),
        steps: Vec::new(),
        legs: Vec::new(),
        faults: Vec::new(),
        inspection_duration: None,
    };
    sim.tasks.push_back(Task::Fly { phase: MissionPhase::Inspecting, path: inspection, next: 0, since: f64::NAN });
    sim.tasks.push_back(Task::Fly { phase: MissionPhase::ReturningHome, path: homeward, next: 0, since: f64::NAN });
    sim.run()?;

    let (dr_max_error, dr_rms_error) = error_stats(&sim.steps, |s| s.dr_position);
    let (kalman_max_error, kalman_rms_error) = error_stats(&sim.steps, |s| s.est_position);
    let min_obstacle_clearance = sim.steps.iter().filter_map(|s| s.obstacle_clearance).reduce(f64::min);
    let report = MissionReport {
        seed,
        faults: sim.faults.clone(),
        inspection_duration: sim.inspection_duration.unwrap_or(sim.t()),
        detection_durations: sim.legs.iter().map(|l| l.end_time - l.start_time).collect(),
        total_duration: sim.t(),
        capture_count: sim.captures.len(),
        crack_capture_count: sim.captures.iter().filter(|c| c.label == crate::perception::Label::Crack).count(),
        min_obstacle_clearance,
        dr_max_error,
        dr_rms_error,
        kalman_max_error,
        kalman_rms_error,
        noiseless_sensors: params.imu.is_noiseless(),
    };
    Ok(MissionOutput {
        report,
        plan,
        captures: sim.captures,
        steps: sim.steps,
        phases: sim.phases,
        legs: sim.legs,
        trajectory_stride: params.trajectory_stride,
    })
}

/// Position errors of a stationary hover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoverResult {
    pub seed: u64,
    pub dr_max_error: f64,
    pub kalman_max_error: f64,
    /// Least-squares slope of the Kalman error norm over the final half (m/s).
    pub kalman_late_slope: f64,
}

/// Hover in place for `duration` seconds with a zero command, estimating the
/// pose with the mission's sensor and filter chain.
pub fn run_hover(params: &MissionParams, seed: u64, duration: f64) -> Result<HoverResult, MissionError> {
    params.validate()?;
    let start = TrueState::at_rest(Vector3::new(0.0, 0.0, 2.0), 0.0);
    let mut est = Estimator::new(params, seed, &start);
    let n = (duration / params.dt).round() as usize;
    let mut kf_err = Vec::with_capacity(n);
    let mut dr_max: f64 = 0.0;
    let mut truth = start;
    for k in 0..n {
        truth.time = k as f64 * params.dt;
        let e = est.update(&truth, &Vector3::zeros(), params.dt)?;
        dr_max = dr_max.max((e.dead_reckoned - truth.position).norm());
        kf_err.push((truth.time, (e.position - truth.position).norm()));
    }
    let kalman_max_error = kf_err.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    let late: Vec<(f64, f64)> = kf_err.iter().copied().filter(|(t, _)| *t >= duration / 2.0).collect();
    Ok(HoverResult { seed, dr_max_error: dr_max, kalman_max_error, kalman_late_slope: linear_slope(&late) })
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn linear_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
