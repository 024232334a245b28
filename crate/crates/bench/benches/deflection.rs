use criterion::{black_box, criterion_group, criterion_main, Criterion};
use lensgeo_core::{
    closed_form_k, deflection_gb, gauss_curvature, gauss_curvature_liouville, shoot_deflection, MetricId, Point,
    QuadratureConfig, ShootConfig, SpacetimeParams,
};

fn curvature(c: &mut Criterion) {
    let params = SpacetimeParams::new(1.0, 0.5).unwrap();
    let p = Point::new(10.0, 0.0);
    let mut group = c.benchmark_group("curvature");
    group.bench_function("riemann", |b| {
        b.iter(|| gauss_curvature(MetricId::KerrReducedOptical, params, black_box(p)).unwrap())
    });
    group.bench_function("liouville", |b| {
        b.iter(|| gauss_curvature_liouville(MetricId::KerrReducedOptical, params, black_box(p)).unwrap())
    });
    group.bench_function("closed_form", |b| {
        b.iter(|| closed_form_k(MetricId::KerrReducedOptical, params, black_box(p)).unwrap())
    });
    group.finish();
}

fn deflection(c: &mut Criterion) {
    let params = SpacetimeParams::schwarzschild(1.0);
    let mut group = c.benchmark_group("deflection");
    group.sample_size(10);
    group.bench_function("gauss_bonnet_b1e3", |b| {
        let cfg = QuadratureConfig::default();
        b.iter(|| deflection_gb(MetricId::SchwarzschildOptical, params, black_box(1e3), &cfg).unwrap())
    });
    group.bench_function("shooting_b100", |b| {
        let cfg = ShootConfig::default();
        b.iter(|| shoot_deflection(MetricId::SchwarzschildOptical, params, black_box(100.0), &cfg).unwrap())
    });
    group.finish();
}

criterion_group!(benches, curvature, deflection);
criterion_main!(benches);
