use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use revmix::orbit::{find_fixed_points, return_map_fixed_points, SolverOptions};
use revmix::return_map::rescale_residual;
use revmix::{HenonParams, Model, Point2, ProductHenonParams, Rect, ReturnKind, SaddleNormalForm};
use revmix_bench::{apply_all, centred_spec, limit_samples};

fn limit_maps(c: &mut Criterion) {
    let pts = limit_samples(32);
    let h = ProductHenonParams::new(-1.0, -0.5).unwrap();
    let henon = HenonParams::new(1.0, -0.5);
    c.bench_function("product_map_apply_1024", |b| b.iter(|| apply_all(black_box(&h), &pts)));
    c.bench_function("henon_apply_1024", |b| b.iter(|| apply_all(black_box(&henon), &pts)));
    c.bench_function("product_map_fixed_points", |b| {
        b.iter(|| find_fixed_points(black_box(&h), Rect::square(4.0), 16, 1).unwrap())
    });
}

fn local_map(c: &mut Criterion) {
    let t0 = SaddleNormalForm::reference();
    let p = Point2::new(0.9, 0.01);
    c.bench_function("t0_iterate_16", |b| b.iter(|| t0.t0_iterate_direct(black_box(p), 16)));
}

fn return_maps(c: &mut Criterion) {
    let model = Model::reference();
    let opts = SolverOptions::default();
    let t1 = centred_spec(&model, ReturnKind::T1k, 10);
    let t12 = centred_spec(&model, ReturnKind::T12km, 10);
    c.bench_function("t1k_fixed_points_k10", |b| b.iter(|| return_map_fixed_points(&model, black_box(t1), &opts)));
    c.bench_function("t12kk_rescale_residual_k10", |b| {
        b.iter(|| rescale_residual(&model, black_box(t12), Rect::square(2.0), 21))
    });
}

criterion_group!(benches, limit_maps, local_map, return_maps);
criterion_main!(benches);
