use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use preisach::compensator::run_feedforward;
use preisach::{batch, CompensatorConfig, DensityGrid, GaussianParams, InitMode, PreisachState, SampledSignal, TriangularMesh};

fn density(n: usize) -> Arc<DensityGrid> {
    let mesh = Arc::new(TriangularMesh::new(n, -1.0, 1.0).unwrap());
    Arc::new(DensityGrid::gaussian(mesh, &GaussianParams::default(), (-1.0, 1.0)).unwrap())
}

fn compensation_batch(c: &mut Criterion) {
    let d = density(200);
    let amplitudes: Vec<f64> = (1..=8).map(|k| 0.1 * k as f64).collect();
    let run = |&a: &f64| {
        let reference = SampledSignal::sine(a, 5.0, 0.2, 1e-5).unwrap();
        let model = PreisachState::new(d.clone(), InitMode::Demagnetized);
        let out = run_feedforward(CompensatorConfig::default(), model, &reference).unwrap();
        out.iter().map(|s| s.e.abs()).fold(0.0, f64::max)
    };
    let mut g = c.benchmark_group("compensation_batch");
    g.sample_size(10);
    g.bench_function(BenchmarkId::new("sequential", amplitudes.len()), |b| b.iter(|| batch::map_seq(&amplitudes, run)));
    #[cfg(feature = "parallel")]
    g.bench_function(BenchmarkId::new("parallel", amplitudes.len()), |b| b.iter(|| batch::map_par(&amplitudes, run)));
    g.finish();
}

fn density_builds(c: &mut Criterion) {
    let sizes = [100usize, 200, 300, 400];
    let mut g = c.benchmark_group("density_builds");
    g.sample_size(10);
    g.bench_function("sequential", |b| b.iter(|| batch::map_seq(&sizes, |&n| density(n).total_mass())));
    #[cfg(feature = "parallel")]
    g.bench_function("parallel", |b| b.iter(|| batch::map_par(&sizes, |&n| density(n).total_mass())));
    g.finish();
}

criterion_group!(benches, compensation_batch, density_builds);
criterion_main!(benches);
