use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use toric_renyi::fermion::solve_chain;
use toric_renyi::lattice::{build_partition_at, LatticeSpec, PartitionCase, Star, Variant};
use toric_renyi::observables::{renyi_boundary, topological_renyi, wilson_loop, RenyiOptions};
use toric_renyi::pcut::{flow_expand, renyi_family, series_renyi, Regime};
use toric_renyi::pfaffian::pfaffian;

fn antisymmetric(dim: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |i, j| {
        ((i * 31 + j * 17) % 13) as f64 / 13.0 - 0.5
    });
    &a - a.transpose()
}

fn pfaffians(c: &mut Criterion) {
    let mut g = c.benchmark_group("pfaffian");
    for dim in [16, 64, 128] {
        let m = antisymmetric(dim);
        g.bench_with_input(BenchmarkId::from_parameter(dim), &m, |b, m| {
            b.iter(|| pfaffian(black_box(m)))
        });
    }
    g.finish();
}

fn chains(c: &mut Criterion) {
    c.bench_function("solve_chain/500", |b| {
        b.iter(|| solve_chain(black_box(500), 0.9))
    });
    let chain = solve_chain(500, 0.9).unwrap();
    c.bench_function("wilson_loop/500x100", |b| {
        b.iter(|| wilson_loop(&chain, black_box(100)))
    });
}

fn renyi(c: &mut Criterion) {
    let chain = solve_chain(40, 1.0).unwrap();
    let geom =
        build_partition_at(PartitionCase::new(1, 6, 2).unwrap(), 40, Star::new(0, 0)).unwrap();
    c.bench_function("renyi_boundary/case1_40_6_2", |b| {
        b.iter(|| renyi_boundary(&chain, black_box(&geom), RenyiOptions::default()))
    });
    let spec = LatticeSpec::new(40, Variant::Quasi1d, 1.0).unwrap();
    c.bench_function("topological_renyi/40_6_2", |b| {
        b.iter(|| topological_renyi(black_box(&spec), 6, 2, RenyiOptions::default()))
    });
}

fn series(c: &mut Criterion) {
    let mut g = c.benchmark_group("series");
    g.sample_size(10);
    g.bench_function("flow_expand/five_letters_order4", |b| {
        b.iter(|| flow_expand(black_box(&[-4, -2, 0, 2, 4]), 4))
    });
    let fam = renyi_family(4).unwrap();
    g.bench_function("series_renyi/quasi1d_small_order4", |b| {
        b.iter(|| series_renyi(Regime::SmallField, Variant::Quasi1d, black_box(&fam), 4))
    });
    g.finish();
}

criterion_group!(benches, pfaffians, chains, renyi, series);
criterion_main!(benches);
