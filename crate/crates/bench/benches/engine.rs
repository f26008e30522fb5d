use criterion::{black_box, criterion_group, criterion_main, Criterion};

use superint::detsolve::{commutator_oracle, residual_determining, GaussianTest};
use superint::dynamics::integrate;
use superint::specfun::painleve4;
use superint_bench::{instance, p4_special_ic, start_state, RESIDUAL_ENTRIES};

fn residuals(c: &mut Criterion) {
    let mut group = c.benchmark_group("residual_determining");
    for id in RESIDUAL_ENTRIES {
        let inst = instance(id);
        let grid = inst.default_grid();
        group.bench_function(id, |b| {
            b.iter(|| residual_determining(&inst.potential, black_box(&inst.integrals[0]), &grid).unwrap())
        });
    }
    group.finish();
}

fn trajectories(c: &mut Criterion) {
    let inst = instance("C.3");
    let s0 = start_state(&inst);
    c.bench_function("integrate C.3 to t=100", |b| b.iter(|| integrate(&inst.potential, black_box(s0), 100.0, 1e-12).unwrap()));
}

fn transcendents(c: &mut Criterion) {
    c.bench_function("painleve4 on [1, 3]", |b| {
        b.iter(|| painleve4((1.0, 3.0), -8.0, 0.0, -1.0 / 18.0, black_box(p4_special_ic())).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let inst = instance("Q.14");
    let test = GaussianTest { center: (1.3, 1.3), sigma: 0.2 };
    c.bench_function("commutator oracle h=0.025", |b| {
        b.iter(|| commutator_oracle(&inst.potential, &inst.integrals[2], &test, (0.8, 1.8), black_box(0.025), 6).unwrap())
    });
}

criterion_group!(benches, residuals, trajectories, transcendents, oracle);
criterion_main!(benches);
