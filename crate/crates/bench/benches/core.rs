//! Microbenchmarks for the numeric hot paths: kernel evaluation, one
//! objective gradient pass, the conjugate-gradient loop, a short training
//! run, neighbourhood fitting, and network generation.
//!
//! Every input comes from a fixed seed, so repeated runs measure the same
//! workload.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sprec_bench::planted_ratings;
use sprec_core::evaluation::ItemKnnModel;
use sprec_core::models::{ModelFamily, ModelKind, NodePair};
use sprec_core::netgen::{generate, NetGenConfig};
use sprec_core::objective::{Objective, ObjectiveKind, ObjectiveSpec, ScaledRatings};
use sprec_core::optimizer::{minimize, ObjectiveFn, OptimizerConfig};
use sprec_core::rng;
use sprec_core::scaling::{assign_degrees, ScalingConfig, DEFAULT_P_MAX, DEFAULT_P_MIN};
use sprec_core::trainer::{train, TrainConfig};

const DIM: usize = 10;

fn kernel_batch(c: &mut Criterion) {
    const PAIRS: usize = 1024;
    let mut r = rng::substream(11, "bench-kernel", 0);
    let xs: Vec<f64> = (0..PAIRS * DIM)
        .map(|_| rng::uniform_in(&mut r, -1.5, 1.5))
        .collect();
    let ys: Vec<f64> = (0..PAIRS * DIM)
        .map(|_| rng::uniform_in(&mut r, -1.5, 1.5))
        .collect();
    let kappas: Vec<f64> = (0..2 * PAIRS)
        .map(|_| rng::uniform_in(&mut r, 1.0, 6.0))
        .collect();

    let mut group = c.benchmark_group("kernel_1024_pairs");
    for (name, model) in [
        ("sphm1", ModelKind::Sphm1 { alpha: 2.0 }),
        ("sphm2", ModelKind::Sphm2),
        ("spdp", ModelKind::Spdp),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| {
                let mut acc = 0.0;
                for p in 0..PAIRS {
                    let pair = NodePair {
                        x: &xs[p * DIM..(p + 1) * DIM],
                        y: &ys[p * DIM..(p + 1) * DIM],
                        kappa_u: kappas[2 * p],
                        kappa_v: kappas[2 * p + 1],
                    };
                    acc += model.kernel(black_box(&pair));
                }
                acc
            })
        });
    }
    group.finish();
}

fn objective_gradient(c: &mut Criterion) {
    let ds = planted_ratings(60, 30, 17);
    let cfg = ScalingConfig::new(DEFAULT_P_MIN, DEFAULT_P_MAX, ds.r_min(), ds.r_max())
        .expect("default probability window is valid");
    let data = ScaledRatings::from_dataset(&ds, &cfg).expect("dataset fits its declared scale");
    let model = ModelKind::Sphm2;
    let (users, items) = assign_degrees(&ds, &model, &cfg).expect("degrees are assignable");
    let spec = ObjectiveSpec::new(ObjectiveKind::L2, 0.1).expect("lambda is non-negative");
    let obj = Objective::new(model, spec, DIM, &data, &users, &items, true)
        .expect("shapes are consistent");

    let n = obj.layout().len();
    let mut r = rng::substream(11, "bench-objective", 0);
    let x: Vec<f64> = (0..n).map(|_| rng::uniform_in(&mut r, -0.1, 0.1)).collect();
    let mut grad = vec![0.0; n];

    c.bench_function("objective_value_and_gradient", |b| {
        b.iter(|| obj.value_and_gradient(black_box(&x), &mut grad).unwrap())
    });
}

/// Separable quadratic with condition number 50, so the line search and the
/// restart logic both get exercised.
struct Quadratic {
    scales: Vec<f64>,
}

impl ObjectiveFn for Quadratic {
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> sprec_core::Result<f64> {
        let mut value = 0.0;
        for ((xi, g), s) in x.iter().zip(grad.iter_mut()).zip(&self.scales) {
            value += 0.5 * s * xi * xi;
            *g = s * xi;
        }
        Ok(value)
    }
}

fn optimizer_quadratic(c: &mut Criterion) {
    let n = 50;
    let quad = Quadratic {
        scales: (0..n).map(|i| 1.0 + i as f64).collect(),
    };
    let cfg = OptimizerConfig {
        max_iterations: 200,
        grad_tolerance: 1e-8,
        ..OptimizerConfig::default()
    };
    let x0 = vec![1.0; n];

    c.bench_function("optimizer_quadratic_50d", |b| {
        b.iter(|| minimize(&quad, black_box(x0.clone()), &cfg).unwrap())
    });
}

fn train_short(c: &mut Criterion) {
    let ds = planted_ratings(40, 20, 23);
    let cfg = TrainConfig {
        dim: 5,
        lambda: 0.1,
        objective: ObjectiveKind::L2,
        optimizer: OptimizerConfig {
            max_iterations: 40,
            ..OptimizerConfig::default()
        },
        ..TrainConfig::default()
    };

    c.bench_function("train_sphm2_40_iterations", |b| {
        b.iter(|| train(black_box(&ds), ModelFamily::Sphm2, &cfg).unwrap())
    });
}

fn itemknn_fit(c: &mut Criterion) {
    let ds = planted_ratings(120, 60, 29);

    c.bench_function("itemknn_fit_k25", |b| {
        b.iter(|| ItemKnnModel::fit(black_box(&ds), 25).unwrap())
    });
}

fn netgen_generate(c: &mut Criterion) {
    let cfg = NetGenConfig::new(300, 2.5, 2.0, 7).with_target_mean_degree(6.0);

    c.bench_function("netgen_300_nodes", |b| {
        b.iter(|| generate(black_box(&cfg)).unwrap())
    });
}

criterion_group!(
    benches,
    kernel_batch,
    objective_gradient,
    optimizer_quadratic,
    train_short,
    itemknn_fit,
    netgen_generate
);
criterion_main!(benches);
