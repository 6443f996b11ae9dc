//! Batches of independent runs: seed sweeps, dead-reckoning Monte Carlo and
//! facade coverage grids.
//!
//! Every batch takes an [`Exec`]. `Exec::Parallel` fans out over rayon when the
//! `parallel` feature is on and degrades to a plain loop when it is off.
//! Results come back in input order either way, so the two are interchangeable.

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::SpecError;
use crate::estimation::dead_reckon;
use crate::mission::{run_hover, HoverResult, MissionError, MissionParams};
use crate::planner::{generate_perimeter_path, PlanParams, WaypointKind};
use crate::world::{facade_point_visible, CameraModel, Face, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

/// `f` applied to every item, in order.
pub fn map_items<I, T, F>(items: &[I], exec: Exec, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

pub fn map_seeds<T, F>(seeds: &[u64], exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    map_items(seeds, exec, |s| f(*s))
}

/// Stationary hovers, one per seed.
pub fn hover_sweep(
    params: &MissionParams,
    seeds: &[u64],
    duration: f64,
    exec: Exec,
) -> Result<Vec<HoverResult>, MissionError> {
    map_seeds(seeds, exec, |s| run_hover(params, s, duration)).into_iter().collect()
}

/// Spread of naive double integration under white acceleration noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSpread {
    /// Sample times (s).
    pub times: Vec<f64>,
    /// Standard deviation of the integrated position across seeds, per time.
    pub std: Vec<f64>,
}

/// Double-integrate `steps` samples of zero-mean white noise with standard
/// deviation `sigma` once per seed and report the cross-seed spread of the
/// position at every `every`-th sample.
pub fn dead_reckon_spread(sigma: f64, dt: f64, steps: usize, every: usize, seeds: &[u64], exec: Exec) -> DriftSpread {
    assert!(every > 0 && seeds.len() > 1, "need a stride and at least two seeds");
    let picks: Vec<usize> = (every..steps).step_by(every).collect();
    let traces = map_seeds(seeds, exec, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let accel: Vec<Vector3<f64>> =
            (0..steps).map(|_| Vector3::new(rng.sample::<f64, _>(StandardNormal) * sigma, 0.0, 0.0)).collect();
        let trace = dead_reckon(&accel, dt);
        picks.iter().map(|&k| trace[k].x).collect::<Vec<f64>>()
    });
    let n = seeds.len() as f64;
    let std = (0..picks.len())
        .map(|j| {
            let mean = traces.iter().map(|t| t[j]).sum::<f64>() / n;
            (traces.iter().map(|t| (t[j] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        })
        .collect();
    // the first sample only anchors the integration, so sample k sits at (k - 1) dt
    DriftSpread { times: picks.iter().map(|&k| (k - 1) as f64 * dt).collect(), std }
}

/// Share of facade sample points imaged from at least one ring waypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    pub face: Face,
    pub points: usize,
    pub covered: usize,
}

impl Coverage {
    pub fn fraction(&self) -> f64 {
        if self.points == 0 {
            0.0
        } else {
            self.covered as f64 / self.points as f64
        }
    }
}

/// Lay a `spacing` grid over every facade and check each point against the
/// camera at each ring waypoint of the perimeter plan.
pub fn coverage_grid(
    scene: &Scene,
    plan: &PlanParams,
    camera: &CameraModel,
    home: &Vector3<f64>,
    spacing: f64,
    exec: Exec,
) -> Result<Vec<Coverage>, SpecError> {
    if !(spacing > 0.0) {
        return Err(SpecError::invalid("coverage spacing must be positive"));
    }
    let b = scene.building.ok_or_else(|| SpecError::invalid("coverage needs a building"))?;
    let path = generate_perimeter_path(&b, plan, home)?;
    let poses: Vec<(Vector3<f64>, f64)> =
        path.waypoints.iter().filter(|w| w.kind == WaypointKind::Ring).map(|w| (w.position, w.yaw)).collect();

    let mut samples: Vec<(Face, Vector3<f64>, Vector2<f64>)> = Vec::new();
    for face in Face::ALL {
        let half = b.face_length(face) / 2.0;
        let nu = (2.0 * half / spacing).floor() as usize;
        let nv = (b.height / spacing).floor() as usize;
        for i in 0..nu {
            for j in 0..nv {
                let u = -half + (i as f64 + 0.5) * spacing;
                let v = (j as f64 + 0.5) * spacing;
                samples.push((face, b.facade_point(face, u, v), face.normal()));
            }
        }
    }
    let seen = map_items(&samples, exec, |(_, p, n)| {
        poses.iter().any(|(eye, yaw)| facade_point_visible(scene, eye, *yaw, camera, p, n))
    });
    Ok(Face::ALL
        .iter()
        .map(|&face| {
            let hits: Vec<bool> =
                samples.iter().zip(&seen).filter(|((f, _, _), _)| *f == face).map(|(_, s)| *s).collect();
            Coverage { face, points: hits.len(), covered: hits.iter().filter(|s| **s).count() }
        })
        .collect())
}
