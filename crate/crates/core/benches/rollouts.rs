use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use smppi::benchmarks::{build_track, TrackSpec};
use smppi::controllers::{Controller, Mppi, Smppi};
use smppi::costs::{PendulumCost, VehicleCost, VehicleCostWeights};
use smppi::dynamics::{BicycleModel, BicycleParams, PendulumModel, PendulumParams};
use smppi::{ExecMode, SolverConfig};

fn pendulum_solver(samples: usize) -> SolverConfig {
    SolverConfig {
        samples,
        horizon: 20,
        dt: 0.05,
        temperature: 1.0,
        noise_covariance: vec![1.0],
        action_min: vec![-3.0],
        action_max: vec![3.0],
        derivative_min: Some(vec![-15.0]),
        derivative_max: Some(vec![15.0]),
        action_cost_weight: Some(vec![1.0]),
        control_cost: Default::default(),
        seed: 1,
    }
}

fn vehicle_solver(samples: usize) -> SolverConfig {
    SolverConfig {
        samples,
        horizon: 30,
        dt: 0.05,
        temperature: 1.0,
        noise_covariance: vec![0.01, 0.09],
        action_min: vec![-0.5, -1.0],
        action_max: vec![0.5, 1.0],
        derivative_min: Some(vec![-1.0, -4.0]),
        derivative_max: Some(vec![1.0, 4.0]),
        action_cost_weight: Some(vec![100.0, 100.0]),
        control_cost: Default::default(),
        seed: 1,
    }
}

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn pendulum(c: &mut Criterion) {
    let model = PendulumModel::new(PendulumParams::default(), 0.05, 1).unwrap();
    let cost = PendulumCost::default();
    let mut group = c.benchmark_group("pendulum_step");
    for samples in [256, 1024] {
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(format!("mppi_{name}"), samples), &samples, |b, &k| {
                let mut ctl = Mppi::new(pendulum_solver(k)).unwrap().with_exec_mode(mode);
                b.iter(|| black_box(ctl.step(&[0.0, 0.0], &model, &cost).unwrap()));
            });
            group.bench_with_input(BenchmarkId::new(format!("smppi_{name}"), samples), &samples, |b, &k| {
                let mut ctl = Smppi::new(pendulum_solver(k)).unwrap().with_exec_mode(mode);
                b.iter(|| black_box(ctl.step(&[0.0, 0.0], &model, &cost).unwrap()));
            });
        }
    }
    group.finish();
}

fn vehicle(c: &mut Criterion) {
    let track = Arc::new(build_track(&TrackSpec::default()).unwrap());
    let (x, y, yaw) = track.pose_at(0.0);
    let x0 = [x, y, yaw, 11.0, 0.0, 0.0];
    let model = BicycleModel::new(BicycleParams::default(), 0.05, 1).unwrap();
    let cost = VehicleCost::new(track, 11.0, VehicleCostWeights::default());
    let mut group = c.benchmark_group("vehicle_step");
    group.sample_size(20);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::new(format!("smppi_{name}"), 512), |b| {
            let mut ctl = Smppi::new(vehicle_solver(512)).unwrap().with_exec_mode(mode);
            b.iter(|| black_box(ctl.step(&x0, &model, &cost).unwrap()));
        });
    }
    group.finish();
}

criterion_group!(benches, pendulum, vehicle);
criterion_main!(benches);
