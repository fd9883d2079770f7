use std::hint::black_box;

use cavex_bench::blue_case;
use cavex_core::experiment::run_outcome;
use criterion::{criterion_group, criterion_main, Criterion};

fn single_runs(c: &mut Criterion) {
    let mut g = c.benchmark_group("run");
    g.sample_size(20);
    for (name, phonons) in [("lindblad", false), ("redfield", true)] {
        let cfg = blue_case(phonons);
        g.bench_function(name, |b| b.iter(|| run_outcome(black_box(&cfg)).unwrap()));
    }
    let mut fock = blue_case(false);
    fock.solver.n_max = 5;
    g.bench_function("lindblad n_max=5", |b| b.iter(|| run_outcome(black_box(&fock)).unwrap()));
    g.finish();
}

criterion_group!(benches, single_runs);
criterion_main!(benches);
