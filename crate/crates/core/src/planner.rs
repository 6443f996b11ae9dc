//! Inspection and detection paths.
//!
//! The inspection path is a stack of axis-aligned rings offset outward from
//! the building footprint; each ring's traversal length is its Manhattan
//! perimeter. Detection legs are shortest paths from the drone to a capture
//! pose, detouring around the building over the ring corners when the
//! straight line would cut through it.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::attitude::wrap_angle;
use crate::error::SpecError;
use crate::world::{BuildingSpec, Face, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaypointKind {
    Takeoff,
    Transit,
    Ring,
    Climb,
    ReturnHome,
    Target,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub position: Vector3<f64>,
    /// Heading to hold at the waypoint (rad).
    pub yaw: f64,
    pub layer: u32,
    pub kind: WaypointKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaypointPath {
    pub waypoints: Vec<Waypoint>,
}

impl WaypointPath {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Euclidean length of the polyline through the waypoints.
    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1].position - w[0].position).norm()).sum()
    }

    /// Waypoints of one altitude layer's ring, in traversal order.
    pub fn ring(&self, layer: u32) -> Vec<Waypoint> {
        self.waypoints.iter().filter(|w| w.kind == WaypointKind::Ring && w.layer == layer).copied().collect()
    }

    pub fn layers(&self) -> Vec<u32> {
        let mut l: Vec<u32> = self.waypoints.iter().filter(|w| w.kind == WaypointKind::Ring).map(|w| w.layer).collect();
        l.dedup();
        l
    }

    /// Plot export: `layer,x_m,y_m,z_m,yaw_rad`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layer,x_m,y_m,z_m,yaw_rad\n");
        for w in &self.waypoints {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                w.layer,
                crate::fmt_sig9(w.position.x),
                crate::fmt_sig9(w.position.y),
                crate::fmt_sig9(w.position.z),
                crate::fmt_sig9(w.yaw)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanParams {
    /// Lateral distance of the flight ring from the facades (m).
    pub standoff: f64,
    /// Inflation of the footprint inside which laser returns are ignored (m).
    pub buffer: f64,
    pub layer_height: f64,
    pub first_layer_alt: f64,
    pub waypoint_spacing: f64,
}

impl Default for PlanParams {
    fn default() -> Self {
        Self { standoff: 3.0, buffer: 1.0, layer_height: 3.0, first_layer_alt: 1.5, waypoint_spacing: 2.0 }
    }
}

impl PlanParams {
    pub fn validate(&self) -> Result<(), SpecError> {
        if !(self.standoff > 0.0) {
            return Err(SpecError::invalid("standoff must be > 0"));
        }
        if !(self.buffer >= 0.0) {
            return Err(SpecError::invalid("buffer must be >= 0"));
        }
        if !(self.layer_height > 0.0) || !(self.waypoint_spacing > 0.0) {
            return Err(SpecError::invalid("layer_height and waypoint_spacing must be > 0"));
        }
        if !(self.first_layer_alt >= 0.0) {
            return Err(SpecError::invalid("first_layer_alt must be >= 0"));
        }
        Ok(())
    }
}

/// Footprint inflated by the buffer; laser hits inside it belong to the building.
pub fn avoidance_polygon(b: &BuildingSpec, p: &PlanParams) -> Rect {
    b.footprint().inflate(p.buffer)
}

/// The rectangle the flight ring follows.
pub fn flight_ring(b: &BuildingSpec, p: &PlanParams) -> Rect {
    b.footprint().inflate(p.standoff)
}

/// Layer altitudes `first + k * layer_height` strictly below the roof.
pub fn layer_altitudes(b: &BuildingSpec, p: &PlanParams) -> Vec<f64> {
    (0..).map(|k| p.first_layer_alt + k as f64 * p.layer_height).take_while(|&z| z < b.height).collect()
}

fn bearing(from: &Vector2<f64>, to: &Vector2<f64>) -> f64 {
    let d = to - from;
    d.y.atan2(d.x)
}

/// Heading that looks at the building from `xy`: straight at the facade when
/// the point faces one, otherwise at the footprint center.
pub fn facade_facing_yaw(b: &BuildingSpec, xy: &Vector2<f64>) -> f64 {
    let fp = b.footprint();
    let within_x = xy.x >= fp.min[0] && xy.x <= fp.max[0];
    let within_y = xy.y >= fp.min[1] && xy.y <= fp.max[1];
    let face = match (within_x, within_y) {
        (true, false) if xy.y < fp.min[1] => Some(Face::South),
        (true, false) => Some(Face::North),
        (false, true) if xy.x > fp.max[0] => Some(Face::East),
        (false, true) => Some(Face::West),
        _ => None,
    };
    match face {
        Some(f) => {
            let n = -f.normal();
            n.y.atan2(n.x)
        }
        None => bearing(xy, &b.center()),
    }
}

/// Points on the ring, counter-clockwise from the south-west corner, corners
/// included, every edge split evenly at no more than `spacing`. Not closed.
fn ring_points(ring: &Rect, spacing: f64) -> Vec<Vector2<f64>> {
    let corners = ring.corners();
    let mut pts = Vec::new();
    for i in 0..4 {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        let n = ((b - a).norm() / spacing).ceil().max(1.0) as usize;
        for k in 0..n {
            pts.push(a + (b - a) * (k as f64 / n as f64));
        }
    }
    pts
}

pub fn generate_perimeter_path(
    b: &BuildingSpec,
    p: &PlanParams,
    home: &Vector3<f64>,
) -> Result<WaypointPath, SpecError> {
    b.validate()?;
    p.validate()?;
    let ring = flight_ring(b, p);
    let mut pts = ring_points(&ring, p.waypoint_spacing);
    let home_xy = home.xy();
    let start = pts
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, c)| (*a - home_xy).norm().total_cmp(&(*c - home_xy).norm()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    pts.rotate_left(start);
    let first = pts[0];
    pts.push(first);

    let altitudes = layer_altitudes(b, p);
    let mut waypoints = Vec::new();
    let facing_home = facade_facing_yaw(b, &home_xy);
    let Some(&z0) = altitudes.first() else {
        return Ok(WaypointPath { waypoints });
    };
    waypoints.push(Waypoint {
        position: Vector3::new(home.x, home.y, z0),
        yaw: facing_home,
        layer: 0,
        kind: WaypointKind::Takeoff,
    });
    for (layer, &z) in altitudes.iter().enumerate() {
        let layer = layer as u32;
        // the first point of each upper ring sits straight above the last one below it
        waypoints.extend(pts.iter().map(|xy| Waypoint {
            position: Vector3::new(xy.x, xy.y, z),
            yaw: facade_facing_yaw(b, xy),
            layer,
            kind: WaypointKind::Ring,
        }));
    }
    let top = *altitudes.last().unwrap_or(&z0);
    let last_layer = (altitudes.len() - 1) as u32;
    waypoints.push(Waypoint {
        position: Vector3::new(home.x, home.y, top),
        yaw: facing_home,
        layer: last_layer,
        kind: WaypointKind::ReturnHome,
    });
    waypoints.push(Waypoint { position: *home, yaw: facing_home, layer: last_layer, kind: WaypointKind::ReturnHome });
    Ok(WaypointPath { waypoints })
}

/// Shortest path from `from` to the capture pose `(target, target_yaw)`:
/// vertical move to the target altitude, then straight across, detouring over
/// the corners of `detour` when the straight segment would pass through `keep_out`.
pub fn plan_return_path(
    from: &Vector3<f64>,
    target: &Vector3<f64>,
    target_yaw: f64,
    keep_out: Option<(&Rect, &Rect)>,
) -> WaypointPath {
    let z = target.z;
    let final_wp = Waypoint { position: *target, yaw: target_yaw, layer: 0, kind: WaypointKind::Target };
    if (target - from).norm() < 1e-9 {
        return WaypointPath { waypoints: vec![final_wp] };
    }
    let start = Vector2::new(from.x, from.y);
    let goal = target.xy();
    let route = match keep_out {
        Some((blocked, corners)) => shortest_route(&start, &goal, blocked, corners),
        None => vec![start, goal],
    };
    let mut waypoints = Vec::new();
    if (from.z - z).abs() > 1e-9 {
        let yaw = if route.len() > 1 && (route[1] - route[0]).norm() > 1e-9 {
            bearing(&route[0], &route[1])
        } else {
            target_yaw
        };
        waypoints.push(Waypoint {
            position: Vector3::new(from.x, from.y, z),
            yaw,
            layer: 0,
            kind: WaypointKind::Climb,
        });
    }
    for i in 1..route.len().saturating_sub(1) {
        let yaw = bearing(&route[i], &route[i + 1]);
        waypoints.push(Waypoint {
            position: Vector3::new(route[i].x, route[i].y, z),
            yaw,
            layer: 0,
            kind: WaypointKind::Transit,
        });
    }
    waypoints.push(final_wp);
    WaypointPath { waypoints }
}

/// Visibility-graph shortest path over the corners of `corners`, rejecting
/// edges that enter the interior of `blocked`.
fn shortest_route(start: &Vector2<f64>, goal: &Vector2<f64>, blocked: &Rect, corners: &Rect) -> Vec<Vector2<f64>> {
    let mut nodes = vec![*start, *goal];
    nodes.extend(corners.corners());
    let n = nodes.len();
    let free = |i: usize, j: usize| !blocked.segment_crosses_interior(&nodes[i], &nodes[j]);
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    dist[0] = 0.0;
    for _ in 0..n {
        let Some(u) = (0..n).filter(|&i| !done[i] && dist[i].is_finite()).min_by(|&a, &b| dist[a].total_cmp(&dist[b]))
        else {
            break;
        };
        done[u] = true;
        for v in 0..n {
            if !done[v] && free(u, v) {
                let d = dist[u] + (nodes[v] - nodes[u]).norm();
                if d < dist[v] - 1e-12 {
                    dist[v] = d;
                    prev[v] = u;
                }
            }
        }
    }
    if !dist[1].is_finite() {
        return vec![*start, *goal];
    }
    let mut route = vec![nodes[1]];
    let mut at = 1;
    while at != 0 {
        at = prev[at];
        route.push(nodes[at]);
    }
    route.reverse();
    route
}

/// Heading along which the camera at `wp` looks; used by coverage checks.
pub fn view_direction(yaw: f64) -> Vector3<f64> {
    Vector3::new(yaw.cos(), yaw.sin(), 0.0)
}

/// Signed yaw difference wrapped to `(-pi, pi]`.
pub fn yaw_error(target: f64, current: f64) -> f64 {
    wrap_angle(target - current)
}
