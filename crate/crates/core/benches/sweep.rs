use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use facade_inspect::mission::MissionParams;
use facade_inspect::scenes::default_scene;
use facade_inspect::sweep::{coverage_grid, dead_reckon_spread, hover_sweep, Exec};

const MODES: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn hover_seeds(c: &mut Criterion) {
    let params = MissionParams::default();
    let seeds: Vec<u64> = (0..10).collect();
    let mut g = c.benchmark_group("hover_sweep_10x30s");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| hover_sweep(&params, &seeds, 30.0, exec).unwrap())
        });
    }
    g.finish();
}

fn drift_monte_carlo(c: &mut Criterion) {
    let seeds: Vec<u64> = (0..200).collect();
    let mut g = c.benchmark_group("dead_reckon_monte_carlo_200x2000");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| dead_reckon_spread(0.05, 0.01, 2000, 100, &seeds, exec))
        });
    }
    g.finish();
}

fn facade_coverage(c: &mut Criterion) {
    let scene = default_scene();
    let p = MissionParams::default();
    let home = p.home();
    let mut g = c.benchmark_group("coverage_grid_0.25m");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| coverage_grid(&scene, &p.plan, &p.camera, &home, 0.25, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, hover_seeds, drift_monte_carlo, facade_coverage);
criterion_main!(benches);
