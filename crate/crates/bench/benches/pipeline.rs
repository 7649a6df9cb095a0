use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use eca_bench::{field_samples, geo_points, neighborhood, rocky_course};
use eca_core::geostat::krige_samples;
use eca_core::{
    empirical_variogram, fit_exponential, simulate_traverse, utm_to_wgs84, wgs84_to_utm,
    PlacementConfig,
};

fn geodesy(c: &mut Criterion) {
    let pts = geo_points(1000);
    c.bench_function("utm_round_trip_1000", |b| {
        b.iter(|| {
            for p in &pts {
                let u = wgs84_to_utm(black_box(*p)).unwrap();
                black_box(utm_to_wgs84(u).unwrap());
            }
        })
    });
}

fn variogram(c: &mut Criterion) {
    let mut g = c.benchmark_group("variogram");
    for n in [200, 800] {
        let (_, samples, _) = field_samples(n, 1);
        g.bench_with_input(BenchmarkId::new("empirical", n), &samples, |b, s| {
            b.iter(|| empirical_variogram(black_box(s), 1.0, 15.0).unwrap())
        });
        let ev = empirical_variogram(&samples, 1.0, 15.0).unwrap();
        g.bench_with_input(BenchmarkId::new("fit", n), &ev, |b, ev| {
            b.iter(|| fit_exponential(black_box(ev)).unwrap())
        });
    }
    g.finish();
}

fn kriging(c: &mut Criterion) {
    let mut g = c.benchmark_group("kriging");
    g.sample_size(10);
    for n in [200, 800] {
        let (spec, samples, model) = field_samples(n, 2);
        let nb = neighborhood(&samples);
        g.bench_with_input(BenchmarkId::new("grid", n), &samples, |b, s| {
            b.iter(|| krige_samples(black_box(s), &model, &spec, &nb, None).unwrap())
        });
    }
    g.finish();
}

fn simulate(c: &mut Criterion) {
    let (h, traj, geom) = rocky_course(7);
    let cfg = PlacementConfig::new(0.6, 0.06).unwrap();
    let mut g = c.benchmark_group("terrasim");
    g.sample_size(20);
    g.bench_function("traverse_60m", |b| {
        b.iter(|| simulate_traverse(black_box(&h), &traj, &geom, &cfg, 0.02).unwrap())
    });
    g.finish();
}

criterion_group!(benches, geodesy, variogram, kriging, simulate);
criterion_main!(benches);
