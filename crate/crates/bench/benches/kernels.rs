use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fracdiff_core::*;

fn mittag_leffler_branches(c: &mut Criterion) {
    let mut g = c.benchmark_group("mittag_leffler");
    for (name, eta) in [("series", 2.0), ("integral", 20.0), ("asymptotic", 500.0)] {
        g.bench_function(name, |b| b.iter(|| mittag_leffler(black_box(0.6), 1.0, -black_box(eta))));
    }
    g.finish();
}

fn problem(nx: usize) -> (Domain1D, SymTridiagonal) {
    let d = Domain1D::new(1.0, nx).unwrap();
    let m = assemble_operator(&d, &EllipticCoeffs::constant(&d, 1.0, 0.0).unwrap()).unwrap();
    (d, m)
}

fn solvers(c: &mut Criterion) {
    let (d, m) = problem(255);
    let alpha = FractionalOrder::new(0.5).unwrap();
    let grid = TimeGrid::new(1.0, 500).unwrap();
    let a = d.sample(|x| x * (1.0 - x));
    c.bench_function("discrete_eigensystem_255x64", |b| b.iter(|| discrete_eigensystem(&m, 64, &d).unwrap()));
    let es = discrete_eigensystem(&m, 64, &d).unwrap();
    c.bench_function("solve_homogeneous_255x500", |b| b.iter(|| solve_homogeneous(&es, &a, alpha, &grid).unwrap()));
    c.bench_function("l1_solve_255x500", |b| {
        b.iter(|| l1_solve(&m, &d, &a, &L1Source::Zero, alpha, &grid).unwrap())
    });
    let rho = Rho::from_fn(grid, |t| 1.0 + t * t, |t| 2.0 * t);
    c.bench_function("duhamel_round_trip_500", |b| {
        b.iter(|| recover_rho(&duhamel_mu(&rho, alpha).unwrap(), alpha).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = mittag_leffler_branches, solvers
}
criterion_main!(benches);
