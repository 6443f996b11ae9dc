//! Static scene: building footprint, crack decals, cylindrical obstacles.
//!
//! All geometric queries go through one ray caster ([`Scene::cast_ray`]); the
//! planar laser and the camera occlusion test are both built on it.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::SpecError;

/// Axis-aligned rectangular building standing on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingSpec {
    /// Extent along world x (m).
    pub length: f64,
    /// Extent along world y (m).
    pub width: f64,
    pub height: f64,
    /// Footprint center; the base sits at z = 0.
    pub center_xy: [f64; 2],
}

impl BuildingSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        for (name, v) in [("length", self.length), ("width", self.width), ("height", self.height)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SpecError::invalid(format!("building {name} must be > 0, got {v}")));
            }
        }
        if !self.center_xy.iter().all(|c| c.is_finite()) {
            return Err(SpecError::invalid("building center must be finite"));
        }
        Ok(())
    }

    pub fn footprint(&self) -> Rect {
        Rect::centered(self.center(), self.length / 2.0, self.width / 2.0)
    }

    pub fn center(&self) -> Vector2<f64> {
        Vector2::new(self.center_xy[0], self.center_xy[1])
    }

    /// Facade length along its horizontal axis.
    pub fn face_length(&self, face: Face) -> f64 {
        match face {
            Face::North | Face::South => self.length,
            Face::East | Face::West => self.width,
        }
    }

    /// World point of facade coordinates `(u, v)`: `u` runs along the
    /// counter-clockwise tangent measured from the facade midpoint, `v` is the
    /// height above ground.
    pub fn facade_point(&self, face: Face, u: f64, v: f64) -> Vector3<f64> {
        let n = face.normal();
        let t = face.tangent();
        let c = self.center();
        let half_depth = match face {
            Face::North | Face::South => self.width / 2.0,
            Face::East | Face::West => self.length / 2.0,
        };
        let xy = c + n * half_depth + t * u;
        Vector3::new(xy.x, xy.y, v)
    }

    pub fn contains_xy(&self, p: &Vector2<f64>) -> bool {
        self.footprint().contains(p)
    }
}

/// Building facade, named by its outward normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Face {
    North,
    South,
    East,
    West,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::North, Face::South, Face::East, Face::West];

    /// Outward unit normal in the horizontal plane.
    pub fn normal(self) -> Vector2<f64> {
        match self {
            Face::North => Vector2::new(0.0, 1.0),
            Face::South => Vector2::new(0.0, -1.0),
            Face::East => Vector2::new(1.0, 0.0),
            Face::West => Vector2::new(-1.0, 0.0),
        }
    }

    /// Counter-clockwise tangent (z × normal).
    pub fn tangent(self) -> Vector2<f64> {
        let n = self.normal();
        Vector2::new(-n.y, n.x)
    }
}

/// Rectangular crack marker painted on a facade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultDecal {
    pub id: u32,
    pub face: Face,
    /// `(u, v)`: horizontal offset from the facade midpoint and height above ground (m).
    pub center_uv: [f64; 2],
    /// Half-widths along `u` and `v` (m).
    pub extent_uv: [f64; 2],
}

impl FaultDecal {
    pub fn world_center(&self, building: &BuildingSpec) -> Vector3<f64> {
        building.facade_point(self.face, self.center_uv[0], self.center_uv[1])
    }
}

/// Vertical cylinder standing on the ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub id: u32,
    pub center_xy: [f64; 2],
    pub radius: f64,
    pub height: f64,
}

impl Obstacle {
    pub fn center(&self) -> Vector2<f64> {
        Vector2::new(self.center_xy[0], self.center_xy[1])
    }

    /// Horizontal distance from `p` to the cylinder surface (negative inside).
    pub fn clearance(&self, p: &Vector3<f64>) -> f64 {
        (p.xy() - self.center()).norm() - self.radius
    }
}

/// Axis-aligned rectangle in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn centered(center: Vector2<f64>, half_x: f64, half_y: f64) -> Self {
        Self { min: [center.x - half_x, center.y - half_y], max: [center.x + half_x, center.y + half_y] }
    }

    pub fn inflate(&self, by: f64) -> Self {
        Self { min: [self.min[0] - by, self.min[1] - by], max: [self.max[0] + by, self.max[1] + by] }
    }

    /// Closed-set membership.
    pub fn contains(&self, p: &Vector2<f64>) -> bool {
        p.x >= self.min[0] && p.x <= self.max[0] && p.y >= self.min[1] && p.y <= self.max[1]
    }

    /// Membership in the open interior; points on the boundary are outside.
    pub fn contains_strict(&self, p: &Vector2<f64>) -> bool {
        p.x > self.min[0] && p.x < self.max[0] && p.y > self.min[1] && p.y < self.max[1]
    }

    pub fn corners(&self) -> [Vector2<f64>; 4] {
        [
            Vector2::new(self.min[0], self.min[1]),
            Vector2::new(self.max[0], self.min[1]),
            Vector2::new(self.max[0], self.max[1]),
            Vector2::new(self.min[0], self.max[1]),
        ]
    }

    /// Euclidean distance from `p` to the rectangle (0 inside).
    pub fn distance(&self, p: &Vector2<f64>) -> f64 {
        let dx = (self.min[0] - p.x).max(0.0).max(p.x - self.max[0]);
        let dy = (self.min[1] - p.y).max(0.0).max(p.y - self.max[1]);
        dx.hypot(dy)
    }

    /// True when the open segment `a`–`b` passes through the rectangle interior.
    pub fn segment_crosses_interior(&self, a: &Vector2<f64>, b: &Vector2<f64>) -> bool {
        // Liang-Barsky clip against the open box.
        let d = b - a;
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        for (p, q) in
            [(-d.x, a.x - self.min[0]), (d.x, self.max[0] - a.x), (-d.y, a.y - self.min[1]), (d.y, self.max[1] - a.y)]
        {
            if p.abs() < 1e-15 {
                if q <= 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        t1 - t0 > 1e-9
    }
}

/// Everything the drone can see or hit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scene {
    pub building: Option<BuildingSpec>,
    pub decals: Vec<FaultDecal>,
    pub obstacles: Vec<Obstacle>,
}

impl Scene {
    pub fn new(building: BuildingSpec) -> Self {
        Self { building: Some(building), decals: Vec::new(), obstacles: Vec::new() }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_decal(mut self, decal: FaultDecal) -> Self {
        self.decals.push(decal);
        self
    }

    pub fn with_obstacle(mut self, obstacle: Obstacle) -> Self {
        self.obstacles.push(obstacle);
        self
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let b = match &self.building {
            Some(b) => {
                b.validate()?;
                Some(b)
            }
            None => None,
        };
        let mut ids: Vec<u32> = self.decals.iter().map(|d| d.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(SpecError::invalid("decal ids must be unique"));
        }
        for d in &self.decals {
            let b = b.ok_or_else(|| SpecError::invalid("decals require a building"))?;
            let [u, v] = d.center_uv;
            let [eu, ev] = d.extent_uv;
            let half = b.face_length(d.face) / 2.0;
            if eu < 0.0 || ev < 0.0 || u.abs() + eu > half || v - ev < 0.0 || v + ev > b.height {
                return Err(SpecError::invalid(format!("decal {} does not fit on the {:?} facade", d.id, d.face)));
            }
        }
        let mut ids: Vec<u32> = self.obstacles.iter().map(|o| o.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(SpecError::invalid("obstacle ids must be unique"));
        }
        for o in &self.obstacles {
            if !(o.radius > 0.0) || !(o.height > 0.0) {
                return Err(SpecError::invalid(format!("obstacle {} needs positive radius and height", o.id)));
            }
            if let Some(b) = b {
                if b.footprint().distance(&o.center()) <= o.radius {
                    return Err(SpecError::invalid(format!("obstacle {} intersects the building footprint", o.id)));
                }
            }
        }
        Ok(())
    }

    /// Distance along `dir` (unit) from `origin` to the first surface, if any
    /// lies within `max_range`. An origin inside a solid reports 0.
    pub fn cast_ray(&self, origin: &Vector3<f64>, dir: &Vector3<f64>, max_range: f64) -> Option<f64> {
        let mut best: Option<f64> = None;
        let mut take = |t: Option<f64>| {
            if let Some(t) = t {
                if t <= max_range && best.is_none_or(|b| t < b) {
                    best = Some(t);
                }
            }
        };
        if let Some(b) = &self.building {
            let fp = b.footprint();
            take(ray_box(origin, dir, [fp.min[0], fp.min[1], 0.0], [fp.max[0], fp.max[1], b.height]));
        }
        for o in &self.obstacles {
            take(ray_cylinder(origin, dir, o));
        }
        best
    }

    /// True when `target` can be seen from `eye` without anything in between.
    pub fn line_of_sight(&self, eye: &Vector3<f64>, target: &Vector3<f64>) -> bool {
        let d = target - eye;
        let dist = d.norm();
        if dist < 1e-12 {
            return true;
        }
        let dir = d / dist;
        match self.cast_ray(eye, &dir, dist) {
            Some(t) => t >= dist - 1e-7 * dist.max(1.0),
            None => true,
        }
    }

    /// Smallest horizontal clearance from `p` to any obstacle whose height
    /// reaches `p.z`.
    pub fn obstacle_clearance(&self, p: &Vector3<f64>) -> Option<f64> {
        self.obstacles.iter().filter(|o| p.z <= o.height).map(|o| o.clearance(p)).min_by(f64::total_cmp)
    }
}

fn ray_box(o: &Vector3<f64>, d: &Vector3<f64>, lo: [f64; 3], hi: [f64; 3]) -> Option<f64> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for k in 0..3 {
        if d[k].abs() < 1e-15 {
            if o[k] < lo[k] || o[k] > hi[k] {
                return None;
            }
        } else {
            let a = (lo[k] - o[k]) / d[k];
            let b = (hi[k] - o[k]) / d[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    if t1 < t0 || t1 < 0.0 {
        None
    } else {
        Some(t0.max(0.0))
    }
}

fn ray_cylinder(o: &Vector3<f64>, d: &Vector3<f64>, c: &Obstacle) -> Option<f64> {
    let rel = o.xy() - c.center();
    let inside_xy = rel.norm_squared() <= c.radius * c.radius;
    let inside_z = o.z >= 0.0 && o.z <= c.height;
    if inside_xy && inside_z {
        return Some(0.0);
    }
    let z_ok = |t: f64| {
        let z = o.z + t * d.z;
        (-1e-12..=c.height + 1e-12).contains(&z)
    };
    let mut best: Option<f64> = None;
    let dxy = d.xy();
    let a = dxy.norm_squared();
    if a > 1e-15 {
        let b = 2.0 * rel.dot(&dxy);
        let cc = rel.norm_squared() - c.radius * c.radius;
        let disc = b * b - 4.0 * a * cc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                if t >= 0.0 && z_ok(t) {
                    best = Some(best.map_or(t, |x: f64| x.min(t)));
                    break;
                }
            }
        }
    }
    if d.z.abs() > 1e-15 {
        for plane in [0.0, c.height] {
            let t = (plane - o.z) / d.z;
            if t >= 0.0 {
                let p = o.xy() + dxy * t - c.center();
                if p.norm_squared() <= c.radius * c.radius {
                    best = Some(best.map_or(t, |x: f64| x.min(t)));
                }
            }
        }
    }
    best
}

/// Planar laser geometry. Bins are evenly spaced over `[angle_min, angle_max]`
/// inclusive; angles are body-frame with 0 at the nose and positive to the left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub angle_min: f64,
    pub angle_max: f64,
    pub n_bins: usize,
    pub range_max: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { angle_min: -3.0 * FRAC_PI_4, angle_max: 3.0 * FRAC_PI_4, n_bins: 271, range_max: 20.0 }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.n_bins < 2 || !(self.range_max > 0.0) || !(self.angle_max > self.angle_min) {
            return Err(SpecError::invalid("scan needs n_bins >= 2, range_max > 0, angle_max > angle_min"));
        }
        Ok(())
    }

    pub fn increment(&self) -> f64 {
        (self.angle_max - self.angle_min) / (self.n_bins - 1) as f64
    }

    pub fn angle(&self, bin: usize) -> f64 {
        self.angle_min + bin as f64 * self.increment()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaserScan {
    pub angle_min: f64,
    pub angle_max: f64,
    pub range_max: f64,
    pub ranges: Vec<f64>,
}

impl LaserScan {
    pub fn n_bins(&self) -> usize {
        self.ranges.len()
    }

    pub fn increment(&self) -> f64 {
        (self.angle_max - self.angle_min) / (self.ranges.len() - 1) as f64
    }

    pub fn angle(&self, bin: usize) -> f64 {
        self.angle_min + bin as f64 * self.increment()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ranges.iter().enumerate().map(|(i, &r)| (self.angle(i), r))
    }
}

/// Heading of a body attitude: angle of the body x axis projected on the ground plane.
pub fn heading(q: &UnitQuaternion<f64>) -> f64 {
    let fwd = q * Vector3::x();
    fwd.y.atan2(fwd.x)
}

/// Range readings in the horizontal plane at the drone's altitude. Bins behind
/// the drone do not exist; only `[angle_min, angle_max]` is swept.
pub fn simulate_scan(scene: &Scene, position: &Vector3<f64>, yaw: f64, cfg: &ScanConfig) -> LaserScan {
    let ranges = (0..cfg.n_bins)
        .map(|i| {
            let a = yaw + cfg.angle(i);
            let dir = Vector3::new(a.cos(), a.sin(), 0.0);
            scene.cast_ray(position, &dir, cfg.range_max).map_or(cfg.range_max, |t| t.max(1e-6))
        })
        .collect();
    LaserScan { angle_min: cfg.angle_min, angle_max: cfg.angle_max, range_max: cfg.range_max, ranges }
}

/// Level pinhole camera looking along the body heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraModel {
    /// Full horizontal field of view (rad).
    pub hfov: f64,
    /// Full vertical field of view (rad).
    pub vfov: f64,
    pub max_range: f64,
    /// Largest angle between a facade's outward normal and the ray back to
    /// the camera at which a crack still resolves (rad).
    pub max_incidence: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self { hfov: 90f64.to_radians(), vfov: 60f64.to_radians(), max_range: 15.0, max_incidence: 45f64.to_radians() }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), SpecError> {
        let ok_fov = |f: f64| f > 0.0 && f < std::f64::consts::PI;
        if !ok_fov(self.hfov) || !ok_fov(self.vfov) || !(self.max_range > 0.0) {
            return Err(SpecError::invalid("camera needs fov in (0, pi) and positive range"));
        }
        if !(self.max_incidence > 0.0 && self.max_incidence <= std::f64::consts::FRAC_PI_2) {
            return Err(SpecError::invalid("camera max_incidence must lie in (0, pi/2]"));
        }
        Ok(())
    }

    /// Frustum membership of a world point for a camera at `eye` with heading `yaw`.
    pub fn in_frustum(&self, eye: &Vector3<f64>, yaw: f64, point: &Vector3<f64>) -> bool {
        let d = point - eye;
        if d.norm() > self.max_range {
            return false;
        }
        let (s, c) = yaw.sin_cos();
        let fwd = c * d.x + s * d.y;
        let left = -s * d.x + c * d.y;
        if fwd <= 0.0 {
            return false;
        }
        left.abs() <= fwd * (self.hfov / 2.0).tan() && d.z.abs() <= fwd * (self.vfov / 2.0).tan()
    }
}

/// True when a facade point with outward normal `normal` is imaged by the camera.
pub fn facade_point_visible(
    scene: &Scene,
    eye: &Vector3<f64>,
    yaw: f64,
    camera: &CameraModel,
    point: &Vector3<f64>,
    normal: &Vector2<f64>,
) -> bool {
    let d = point - eye;
    if normal.dot(&d.xy()) >= 0.0 {
        return false;
    }
    // angle between the normal and the ray back to the eye
    let cos_incidence = -normal.dot(&d.xy()) / d.norm();
    if cos_incidence < camera.max_incidence.cos() - 1e-12 {
        return false;
    }
    camera.in_frustum(eye, yaw, point) && scene.line_of_sight(eye, point)
}

/// Ids of decals whose centers are imaged from the given camera pose.
pub fn visible_decals(scene: &Scene, eye: &Vector3<f64>, yaw: f64, camera: &CameraModel) -> Vec<u32> {
    let Some(b) = &scene.building else {
        return Vec::new();
    };
    scene
        .decals
        .iter()
        .filter(|d| facade_point_visible(scene, eye, yaw, camera, &d.world_center(b), &d.face.normal()))
        .map(|d| d.id)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn building() -> BuildingSpec {
        BuildingSpec { length: 20.0, width: 10.0, height: 9.0, center_xy: [0.0, 0.0] }
    }

    #[test]
    fn empty_scene_reads_range_max() {
        let scan = simulate_scan(&Scene::empty(), &Vector3::new(0.0, 0.0, 2.0), 0.7, &ScanConfig::default());
        assert_eq!(scan.n_bins(), 271);
        assert!(scan.ranges.iter().all(|&r| r == 20.0));
    }

    #[test]
    fn wall_ahead_reads_perpendicular_distance() {
        // Building whose west face is the plane x = 3.
        let b = BuildingSpec { length: 10.0, width: 40.0, height: 10.0, center_xy: [8.0, 0.0] };
        let scan = simulate_scan(&Scene::new(b), &Vector3::new(0.0, 0.0, 2.0), 0.0, &ScanConfig::default());
        assert_abs_diff_eq!(scan.ranges[135], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(scan.angle(135), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn drone_above_roof_sees_nothing() {
        let scene = Scene::new(building());
        let scan = simulate_scan(&scene, &Vector3::new(0.0, -8.0, 9.5), 1.0, &ScanConfig::default());
        assert!(scan.ranges.iter().all(|&r| r == 20.0));
    }

    #[test]
    fn cylinder_to_the_right() {
        let scene = Scene::empty().with_obstacle(Obstacle { id: 1, center_xy: [0.0, -4.0], radius: 1.0, height: 5.0 });
        let scan = simulate_scan(&scene, &Vector3::new(0.0, 0.0, 2.0), 0.0, &ScanConfig::default());
        // bin 45 is -90 deg
        assert_abs_diff_eq!(scan.angle(45), -std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(scan.ranges[45], 3.0, epsilon = 1e-12);
        let right_min = scan
            .iter()
            .filter(|(a, _)| (-135f64.to_radians()..=-45f64.to_radians()).contains(a))
            .map(|(_, r)| r)
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(right_min, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn camera_sees_centered_decal() {
        let b = building();
        let decal = FaultDecal { id: 7, face: Face::South, center_uv: [0.0, 3.0], extent_uv: [0.5, 0.5] };
        let scene = Scene::new(b).with_decal(decal);
        let cam = CameraModel::default();
        let eye = Vector3::new(0.0, -10.0, 3.0);
        assert_eq!(visible_decals(&scene, &eye, std::f64::consts::FRAC_PI_2, &cam), vec![7]);
        assert!(visible_decals(&scene, &eye, -std::f64::consts::FRAC_PI_2, &cam).is_empty());
    }

    #[test]
    fn back_face_culled() {
        let b = building();
        let decal = FaultDecal { id: 2, face: Face::East, center_uv: [0.0, 3.0], extent_uv: [0.5, 0.5] };
        let scene = Scene::new(b).with_decal(decal);
        // West side, looking east through the building.
        let eye = Vector3::new(-13.0, 0.0, 3.0);
        assert!(visible_decals(&scene, &eye, 0.0, &CameraModel { max_range: 100.0, ..Default::default() }).is_empty());
    }

    #[test]
    fn grazing_views_do_not_resolve() {
        let b = building();
        let decal = FaultDecal { id: 4, face: Face::South, center_uv: [0.0, 3.0], extent_uv: [0.5, 0.5] };
        let scene = Scene::new(b).with_decal(decal);
        // 4 m along the facade at 3 m standoff: incidence atan(4/3) = 53.1 deg
        let eye = Vector3::new(4.0, -8.0, 3.0);
        let yaw = (3.0f64).atan2(-4.0);
        assert!(visible_decals(&scene, &eye, yaw, &CameraModel::default()).is_empty());
        let wide = CameraModel { max_incidence: 55f64.to_radians(), ..Default::default() };
        assert_eq!(visible_decals(&scene, &eye, yaw, &wide), vec![4]);
    }

    #[test]
    fn obstacle_occludes_decal() {
        let b = building();
        let decal = FaultDecal { id: 1, face: Face::South, center_uv: [0.0, 3.0], extent_uv: [0.5, 0.5] };
        let scene = Scene::new(b).with_decal(decal).with_obstacle(Obstacle {
            id: 1,
            center_xy: [0.0, -7.0],
            radius: 0.5,
            height: 6.0,
        });
        let eye = Vector3::new(0.0, -10.0, 3.0);
        assert!(visible_decals(&scene, &eye, std::f64::consts::FRAC_PI_2, &CameraModel::default()).is_empty());
    }

    #[test]
    fn rejects_bad_scenes() {
        let mut b = building();
        b.length = -1.0;
        assert!(Scene::new(b).validate().is_err());
        let scene =
            Scene::new(building()).with_obstacle(Obstacle { id: 1, center_xy: [10.5, 0.0], radius: 1.0, height: 1.0 });
        assert!(scene.validate().is_err());
        let scene = Scene::new(building()).with_decal(FaultDecal {
            id: 1,
            face: Face::East,
            center_uv: [4.8, 3.0],
            extent_uv: [0.5, 0.5],
        });
        assert!(scene.validate().is_err());
    }

    #[test]
    fn facade_points_lie_on_faces() {
        let b = building();
        assert_abs_diff_eq!(b.facade_point(Face::South, 2.0, 1.0), Vector3::new(2.0, -5.0, 1.0));
        assert_abs_diff_eq!(b.facade_point(Face::East, 2.0, 1.0), Vector3::new(10.0, 2.0, 1.0));
        assert_abs_diff_eq!(b.facade_point(Face::North, 2.0, 1.0), Vector3::new(-2.0, 5.0, 1.0));
        assert_abs_diff_eq!(b.facade_point(Face::West, 2.0, 1.0), Vector3::new(-10.0, -2.0, 1.0));
    }

    #[test]
    fn segment_crossing() {
        let r = Rect { min: [-1.0, -1.0], max: [1.0, 1.0] };
        assert!(r.segment_crosses_interior(&Vector2::new(-3.0, 0.0), &Vector2::new(3.0, 0.0)));
        assert!(!r.segment_crosses_interior(&Vector2::new(-3.0, 1.0), &Vector2::new(3.0, 1.0)));
        assert!(!r.segment_crosses_interior(&Vector2::new(-3.0, 2.0), &Vector2::new(3.0, 2.0)));
        assert!(r.segment_crosses_interior(&Vector2::new(-2.0, -2.0), &Vector2::new(2.0, 2.0)));
    }
}
