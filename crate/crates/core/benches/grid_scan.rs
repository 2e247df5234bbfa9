use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use radshoot::num::logspace;
use radshoot::parallel::Parallelism;
use radshoot::shooting::shoot;
use radshoot::{Problem, ProblemSpec, StopPolicy};

fn grid_scan(c: &mut Criterion) {
    let pb = Problem::new(ProblemSpec::config_a()).unwrap();
    let policy = StopPolicy::default();
    let heights = logspace(1e-3, 0.99, 64);
    let mut group = c.benchmark_group("grid_scan_64_shots");
    group.sample_size(10);
    for (name, par) in [
        ("sequential", Parallelism::sequential()),
        ("parallel", Parallelism::with_jobs(0)),
    ] {
        group.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, par| {
            b.iter(|| {
                par.map(&heights, |&d| {
                    shoot(d, &pb, &policy)
                        .map(|s| s.zeros)
                        .unwrap_or(usize::MAX)
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, grid_scan);
criterion_main!(benches);
