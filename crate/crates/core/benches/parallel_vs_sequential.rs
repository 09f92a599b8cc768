use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wpcn_core::harness::{run_experiment_with, trial_instance, ExperimentConfig, Sweep, SweepPoint, SweepVariable};
use wpcn_core::oracle::{grid_maxmin_coop, OracleSettings};
use wpcn_core::{ChStrategy, Execution, PhyParams};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sweep(c: &mut Criterion) {
    let config = ExperimentConfig {
        devices: 8,
        placements: 4,
        sweep: Sweep {
            variable: SweepVariable::Radius,
            values: vec![1.0, 3.0],
        },
        ..ExperimentConfig::default()
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_experiment_with(&config, exec).unwrap())
        });
    }
    group.finish();
}

fn oracle_grid(c: &mut Criterion) {
    let phy = PhyParams {
        antennas: 2,
        ..PhyParams::default()
    };
    let point = SweepPoint {
        devices: 2,
        distance_m: 6.0,
        radius_m: 3.0,
    };
    let (_, chan) = trial_instance(&point, &phy, 1, 0, ChStrategy::ClosestToCenter, 0).unwrap();
    let mut group = c.benchmark_group("oracle_grid");
    group.sample_size(10);
    for (name, exec) in MODES {
        let settings = OracleSettings {
            resolution: 0.1,
            refine_rounds: 1,
            execution: exec,
            ..OracleSettings::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &settings, |b, s| {
            b.iter(|| grid_maxmin_coop(&chan, &phy, s).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, sweep, oracle_grid);
criterion_main!(benches);
