use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use evap_bench::{reference_ellipsoid, spectrum};
use evap_core::ellipsoid::capacity;
use evap_core::evolution::{simulate, SimulationOptions};
use evap_core::oracle::{mfs_conductor, null_quadrature_integral};
use evap_core::{AngularGrid, HarmonicIndex};

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for lmax in [8, 16, 32] {
        let grid = AngularGrid::for_lmax(lmax);
        let g = spectrum(lmax);
        let values = grid.synthesize(&g).unwrap();
        group.bench_with_input(BenchmarkId::new("synthesize", lmax), &g, |b, g| {
            b.iter(|| grid.synthesize(black_box(g)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("project", lmax), &values, |b, v| {
            b.iter(|| grid.project(black_box(v), lmax).unwrap())
        });
    }
    group.finish();
}

fn evolution(c: &mut Criterion) {
    let g = spectrum(16);
    let opts = SimulationOptions::default();
    c.bench_function("simulate_lmax16", |b| {
        b.iter(|| simulate(black_box(&g), 0.01, 1.0, &opts).unwrap())
    });
}

fn ellipsoid(c: &mut Criterion) {
    c.bench_function("capacity", |b| b.iter(|| capacity(black_box([0.8, 0.9, 1.2])).unwrap()));
    let geom = reference_ellipsoid();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("mfs_300_700", |b| {
        b.iter(|| mfs_conductor(black_box(&geom), 300, 700).unwrap())
    });
    group.bench_function("null_quadrature_l3", |b| {
        b.iter(|| null_quadrature_integral(black_box(&geom), HarmonicIndex { l: 3, m: 1 }, [0.0; 3]).unwrap())
    });
    group.finish();
}

criterion_group!(benches, transforms, evolution, ellipsoid);
criterion_main!(benches);
