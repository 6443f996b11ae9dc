//! PID waypoint tracking and the reactive laser-sector obstacle avoidance
//! that overrides it.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::attitude::wrap_angle;
use crate::error::SpecError;
use crate::planner::Waypoint;
use crate::vehicle::VelocityCommand;
use crate::world::{LaserScan, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Anti-windup bound on the integral accumulator.
    pub i_max: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        Self { kp: 1.00, ki: 0.0001, kd: 0.5, i_max: 100.0 }
    }
}

impl PidGains {
    pub fn validate(&self) -> Result<(), SpecError> {
        if [self.kp, self.ki, self.kd].iter().any(|g| !(*g >= 0.0)) || !(self.i_max >= 0.0) {
            return Err(SpecError::invalid("PID gains and i_max must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: f64,
    pub initialized: bool,
}

/// One PID evaluation. The first call has no derivative term.
pub fn pid_step(gains: &PidGains, state: &PidState, error: f64, dt: f64) -> (f64, PidState) {
    assert!(dt > 0.0, "dt must be positive");
    let prev = if state.initialized { state.prev_error } else { error };
    let integral = (state.integral + error * dt).clamp(-gains.i_max, gains.i_max);
    let output = gains.kp * error + gains.ki * integral + gains.kd * (error - prev) / dt;
    (output, PidState { integral, prev_error: error, initialized: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingParams {
    pub v_max: f64,
    /// Proportional gain from yaw error (rad) to yaw rate (rad/s).
    pub yaw_kp: f64,
    pub yaw_rate_max: f64,
}

impl Default for TrackingParams {
    fn default() -> Self {
        Self { v_max: 3.0, yaw_kp: 1.0, yaw_rate_max: 1.0 }
    }
}

fn world_to_body(v: &Vector3<f64>, yaw: f64) -> Vector3<f64> {
    let (s, c) = yaw.sin_cos();
    Vector3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z)
}

/// Scalar PID on the distance to the waypoint sets the speed; the direction
/// points at the waypoint.
pub fn track_waypoint(
    position: &Vector3<f64>,
    yaw: f64,
    wp: &Waypoint,
    gains: &PidGains,
    state: &PidState,
    params: &TrackingParams,
    dt: f64,
) -> (VelocityCommand, PidState) {
    let delta = wp.position - position;
    let dist = delta.norm();
    let (speed, next) = pid_step(gains, state, dist, dt);
    let speed = speed.clamp(-params.v_max, params.v_max);
    let v_world = if dist > 1e-12 { delta * (speed / dist) } else { Vector3::zeros() };
    let yaw_rate = (params.yaw_kp * wrap_angle(wp.yaw - yaw)).clamp(-params.yaw_rate_max, params.yaw_rate_max);
    (VelocityCommand::new(world_to_body(&v_world, yaw), yaw_rate), next)
}

/// Per-sector nearest return under the engage distance, `None` when clear.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObstacleSectors {
    pub left: Option<f64>,
    pub right: Option<f64>,
    pub front: Option<f64>,
}

impl ObstacleSectors {
    pub fn any(&self) -> bool {
        self.left.is_some() || self.right.is_some() || self.front.is_some()
    }

    pub fn min_dist(&self) -> Option<f64> {
        [self.left, self.right, self.front].into_iter().flatten().min_by(f64::total_cmp)
    }
}

fn fold_min(slot: &mut Option<f64>, r: f64) {
    *slot = Some(slot.map_or(r, |m| m.min(r)));
}

/// Returns whose hit points fall inside `mask` are the building and are
/// ignored; the rest under `d_engage` mark front (|a| <= 45 deg), left
/// (45..=135 deg) or right (-135..-45 deg).
pub fn classify_sectors(
    scan: &LaserScan,
    mask: Option<&Rect>,
    position: &Vector3<f64>,
    yaw: f64,
    d_engage: f64,
) -> ObstacleSectors {
    let mut out = ObstacleSectors::default();
    let eps = 1e-9;
    for (angle, r) in scan.iter() {
        if !(r < d_engage) || r >= scan.range_max {
            continue;
        }
        if angle.abs() > 3.0 * FRAC_PI_4 + eps {
            continue;
        }
        if let Some(mask) = mask {
            let a = yaw + angle;
            let hit = Vector2::new(position.x + r * a.cos(), position.y + r * a.sin());
            if mask.contains(&hit) {
                continue;
            }
        }
        if angle.abs() <= FRAC_PI_4 + eps {
            fold_min(&mut out.front, r);
        } else if angle > 0.0 {
            fold_min(&mut out.left, r);
        } else {
            fold_min(&mut out.right, r);
        }
    }
    out
}

/// PID memory for each sector's repulsion.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AvoidanceState {
    pub left: PidState,
    pub right: PidState,
    pub front: PidState,
}

/// Repulsive body-frame command from the active sectors, driven by a PID on
/// `1 / distance`. Obstacles on the right push left (+y), on the left push
/// right (-y), in front drift left unless the left is also blocked, and an
/// obstacle on all three sides backs the drone out along -x.
pub fn avoidance_command(
    sectors: &ObstacleSectors,
    gains: &PidGains,
    state: &AvoidanceState,
    dt: f64,
    v_max: f64,
) -> (Option<VelocityCommand>, AvoidanceState) {
    if !sectors.any() {
        return (None, AvoidanceState::default());
    }
    let mut next = AvoidanceState::default();
    let repel = |d: Option<f64>, st: &PidState, slot: &mut PidState| -> f64 {
        match d {
            Some(d) => {
                let (out, s) = pid_step(gains, st, 1.0 / d, dt);
                *slot = s;
                out.max(0.0)
            }
            None => 0.0,
        }
    };
    let v = match (sectors.front, sectors.left, sectors.right) {
        (Some(_), Some(_), Some(_)) => {
            let nearest = sectors.min_dist();
            let back = repel(nearest, &state.front, &mut next.front);
            Vector3::new(-back, 0.0, 0.0)
        }
        (front, left, right) => {
            let push_left = repel(right, &state.right, &mut next.right);
            let push_right = repel(left, &state.left, &mut next.left);
            let drift = repel(front, &state.front, &mut next.front);
            let drift = if left.is_some() && right.is_none() { -drift } else { drift };
            Vector3::new(0.0, push_left - push_right + drift, 0.0)
        }
    };
    let speed = v.norm();
    let v = if speed > v_max { v * (v_max / speed) } else { v };
    (Some(VelocityCommand::new(v, 0.0)), next)
}

/// Output of one control decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlDecision {
    pub command: VelocityCommand,
    pub avoiding: bool,
    pub sectors: ObstacleSectors,
}

/// Tracking plus avoidance with the priority rule: any active sector replaces
/// the tracking command for this step.
#[derive(Debug, Clone)]
pub struct Controller {
    pub gains: PidGains,
    pub tracking: TrackingParams,
    pub d_engage: f64,
    track_state: PidState,
    avoid_state: AvoidanceState,
}

impl Controller {
    pub fn new(gains: PidGains, tracking: TrackingParams, d_engage: f64) -> Self {
        Self { gains, tracking, d_engage, track_state: PidState::default(), avoid_state: AvoidanceState::default() }
    }

    /// Forget the tracking PID memory (new waypoint).
    pub fn reset_tracking(&mut self) {
        self.track_state = PidState::default();
    }

    pub fn decide(
        &mut self,
        position: &Vector3<f64>,
        yaw: f64,
        wp: &Waypoint,
        sectors: ObstacleSectors,
        dt: f64,
    ) -> ControlDecision {
        let (avoid, avoid_state) = avoidance_command(&sectors, &self.gains, &self.avoid_state, dt, self.tracking.v_max);
        self.avoid_state = avoid_state;
        match avoid {
            Some(command) => {
                self.track_state = PidState::default();
                ControlDecision { command, avoiding: true, sectors }
            }
            None => {
                let (command, st) =
                    track_waypoint(position, yaw, wp, &self.gains, &self.track_state, &self.tracking, dt);
                self.track_state = st;
                ControlDecision { command, avoiding: false, sectors }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::WaypointKind;
    use crate::world::{simulate_scan, Obstacle, ScanConfig, Scene};
    use approx::assert_abs_diff_eq;

    fn wp(p: Vector3<f64>, yaw: f64) -> Waypoint {
        Waypoint { position: p, yaw, layer: 0, kind: WaypointKind::Ring }
    }

    fn scan_with(returns: &[(f64, f64)]) -> LaserScan {
        let cfg = ScanConfig::default();
        let mut ranges = vec![cfg.range_max; cfg.n_bins];
        for &(deg, r) in returns {
            let i = ((deg.to_radians() - cfg.angle_min) / cfg.increment()).round() as usize;
            ranges[i] = r;
        }
        LaserScan { angle_min: cfg.angle_min, angle_max: cfg.angle_max, range_max: cfg.range_max, ranges }
    }

    #[test]
    fn proportional_only() {
        let g = PidGains { kp: 1.7, ki: 0.0, kd: 0.0, i_max: 100.0 };
        let (out, _) = pid_step(&g, &PidState::default(), 2.0, 0.1);
        assert_abs_diff_eq!(out, 3.4);
    }

    #[test]
    fn default_gains_second_step() {
        let g = PidGains::default();
        let (_, s) = pid_step(&g, &PidState::default(), 2.0, 0.1);
        let (out, _) = pid_step(&g, &s, 2.0, 0.1);
        // P = 2.0, I = 1e-4 * 0.4, D = 0
        assert_abs_diff_eq!(out, 2.00004, epsilon = 1e-12);
    }

    #[test]
    fn zero_error_stays_zero() {
        let g = PidGains::default();
        let mut s = PidState::default();
        for _ in 0..100 {
            let (out, n) = pid_step(&g, &s, 0.0, 0.01);
            assert_eq!(out, 0.0);
            s = n;
        }
        assert_eq!(s.integral, 0.0);
    }

    #[test]
    fn integral_is_clamped() {
        let g = PidGains { i_max: 1.0, ..Default::default() };
        let mut s = PidState::default();
        for _ in 0..1000 {
            s = pid_step(&g, &s, 5.0, 0.1).1;
        }
        assert_eq!(s.integral, 1.0);
    }

    #[test]
    fn converged_tracking_is_silent() {
        let p = Vector3::new(1.0, 2.0, 3.0);
        let (cmd, _) = track_waypoint(
            &p,
            0.5,
            &wp(p, 0.5),
            &PidGains::default(),
            &PidState::default(),
            &TrackingParams::default(),
            0.01,
        );
        assert_eq!(cmd.v_body, Vector3::zeros());
        assert_eq!(cmd.yaw_rate, 0.0);
    }

    #[test]
    fn far_waypoint_saturates() {
        let (cmd, _) = track_waypoint(
            &Vector3::zeros(),
            0.0,
            &wp(Vector3::new(10.0, 0.0, 0.0), 0.0),
            &PidGains::default(),
            &PidState::default(),
            &TrackingParams::default(),
            0.01,
        );
        assert_abs_diff_eq!(cmd.v_body, Vector3::new(3.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn waypoint_above_is_pure_climb() {
        let (cmd, _) = track_waypoint(
            &Vector3::new(4.0, 4.0, 1.0),
            1.2,
            &wp(Vector3::new(4.0, 4.0, 2.0), 1.2),
            &PidGains::default(),
            &PidState::default(),
            &TrackingParams::default(),
            0.01,
        );
        assert_eq!(cmd.v_body.x, 0.0);
        assert_eq!(cmd.v_body.y, 0.0);
        assert!(cmd.v_body.z > 0.0);
    }

    #[test]
    fn sector_cases() {
        let p = Vector3::zeros();
        assert!(!classify_sectors(&scan_with(&[]), None, &p, 0.0, 3.0).any());
        let s = classify_sectors(&scan_with(&[(-90.0, 2.0)]), None, &p, 0.0, 3.0);
        assert_eq!(s.right, Some(2.0));
        assert!(s.left.is_none() && s.front.is_none());
        let s = classify_sectors(&scan_with(&[(0.0, 2.0)]), None, &p, 0.0, 3.0);
        assert_eq!(s.front, Some(2.0));
        assert!(s.left.is_none() && s.right.is_none());
        let s = classify_sectors(&scan_with(&[(100.0, 2.5), (45.0, 2.9)]), None, &p, 0.0, 3.0);
        assert_eq!(s.left, Some(2.5));
        assert_eq!(s.front, Some(2.9));
        // at the threshold nothing engages
        assert!(!classify_sectors(&scan_with(&[(10.0, 3.0)]), None, &p, 0.0, 3.0).any());
    }

    #[test]
    fn masked_returns_are_ignored() {
        let mask = Rect { min: [1.0, -5.0], max: [10.0, 5.0] };
        let s = classify_sectors(&scan_with(&[(0.0, 2.0), (-90.0, 2.0)]), Some(&mask), &Vector3::zeros(), 0.0, 3.0);
        assert!(s.front.is_none());
        assert_eq!(s.right, Some(2.0));
    }

    #[test]
    fn avoidance_directions() {
        let g = PidGains::default();
        let st = AvoidanceState::default();
        assert!(avoidance_command(&ObstacleSectors::default(), &g, &st, 0.01, 3.0).0.is_none());

        let right = ObstacleSectors { right: Some(2.0), ..Default::default() };
        let (cmd, mut s) = avoidance_command(&right, &g, &st, 0.01, 3.0);
        assert!(cmd.unwrap().v_body.y > 0.0);
        let mut last = cmd.unwrap();
        for _ in 0..100 {
            let (c, n) = avoidance_command(&right, &g, &s, 0.01, 3.0);
            last = c.unwrap();
            s = n;
        }
        // steady state: kp / d, integral negligible
        assert_abs_diff_eq!(last.v_body.y, 0.5, epsilon = 1e-3);
        assert_eq!(last.v_body.x, 0.0);

        let left = ObstacleSectors { left: Some(2.0), ..Default::default() };
        assert!(avoidance_command(&left, &g, &st, 0.01, 3.0).0.unwrap().v_body.y < 0.0);
        let front = ObstacleSectors { front: Some(2.0), ..Default::default() };
        assert!(avoidance_command(&front, &g, &st, 0.01, 3.0).0.unwrap().v_body.y > 0.0);

        let boxed = ObstacleSectors { left: Some(1.0), right: Some(1.0), front: Some(1.0) };
        let v = avoidance_command(&boxed, &g, &st, 0.01, 3.0).0.unwrap().v_body;
        assert!(v.x < 0.0);
        assert_eq!(v.y, 0.0);
        assert_eq!(v.z, 0.0);
    }

    #[test]
    fn repulsion_grows_as_obstacle_nears() {
        let g = PidGains::default();
        let steady = |d: f64| {
            let sectors = ObstacleSectors { right: Some(d), ..Default::default() };
            let mut s = AvoidanceState::default();
            let mut v = 0.0;
            for _ in 0..50 {
                let (c, n) = avoidance_command(&sectors, &g, &s, 0.01, 3.0);
                v = c.unwrap().v_body.y;
                s = n;
            }
            v
        };
        let mut prev = 0.0;
        for d in [2.9, 2.5, 2.0, 1.5, 1.0, 0.5] {
            let v = steady(d);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn priority_and_release() {
        let scene = Scene::empty().with_obstacle(Obstacle { id: 1, center_xy: [0.0, -3.0], radius: 1.0, height: 5.0 });
        let cfg = ScanConfig::default();
        let mut ctl = Controller::new(PidGains::default(), TrackingParams::default(), 3.0);
        let target = wp(Vector3::new(10.0, 0.0, 2.0), 0.0);
        let pos = Vector3::new(0.0, 0.0, 2.0);
        let sectors = classify_sectors(&simulate_scan(&scene, &pos, 0.0, &cfg), None, &pos, 0.0, 3.0);
        let d = ctl.decide(&pos, 0.0, &target, sectors, 0.01);
        assert!(d.avoiding);
        assert!(d.command.v_body.y > 0.0);
        assert_eq!(d.command.v_body.x, 0.0);
        // obstacle out of range: tracking resumes on the next step
        let far = Vector3::new(0.0, 5.0, 2.0);
        let sectors = classify_sectors(&simulate_scan(&scene, &far, 0.0, &cfg), None, &far, 0.0, 3.0);
        let d = ctl.decide(&far, 0.0, &target, sectors, 0.01);
        assert!(!d.avoiding);
        assert!(d.command.v_body.x > 0.0);
    }
}
