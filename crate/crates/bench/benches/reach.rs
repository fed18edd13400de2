use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ivreach::partition::{default_workers, run_partitions};
use ivreach::{grid_partition, ControlInput, Integrator, RolloutSettings};
use ivreach_bench::{vehicle_disturbance, vehicle_embedding, vehicle_initial_box};

fn partitions(c: &mut Criterion) {
    let emb = vehicle_embedding().unwrap();
    let x0 = vehicle_initial_box().unwrap();
    let w = vehicle_disturbance();
    let mut group = c.benchmark_group("vehicle_partitions");
    group.sample_size(10);
    for integrator in [Integrator::Euler, Integrator::Tsit5] {
        let settings = RolloutSettings { integrator, t0: 0.0, t_end: 1.25, dt: 0.01 };
        for d in [1, 2] {
            let grid = grid_partition(&x0, &[d; 4]).unwrap();
            let id = BenchmarkId::new(integrator.name(), grid.cells.len());
            group.bench_with_input(id, &grid, |b, grid| {
                b.iter(|| run_partitions(&emb, grid, &w, &ControlInput::None, &settings, default_workers()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, partitions);
criterion_main!(benches);
