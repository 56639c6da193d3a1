use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kirchhoff_bench::{controls, fixtures};
use kirchhoff_core::asymptotics::mass_limits;
use kirchhoff_core::curve::{count_normalized, solve_normalized, trace};
use kirchhoff_core::Solver;

fn ground_state(c: &mut Criterion) {
    let mut g = c.benchmark_group("ground_state");
    for (name, p) in fixtures() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &p, |b, p| {
            b.iter(|| Solver::new(controls()).ground_state(p).unwrap())
        });
    }
    g.finish();
}

fn mass_curve(c: &mut Criterion) {
    let (_, p) = fixtures()[0];
    c.bench_function("mass_curve/33", |b| {
        b.iter(|| trace(&Solver::new(controls()), &p, 1e-4, 1e4, 33).unwrap())
    });
}

fn normalized(c: &mut Criterion) {
    let (_, p) = fixtures()[0];
    let s = Solver::new(controls());
    let curve = trace(&s, &p, 1e-6, 1e6, 25).unwrap();
    let limits = mass_limits(&p, &s).unwrap();
    let count = count_normalized(&curve, 0.01, &limits).unwrap();
    c.bench_function("normalized/c=0.01", |b| {
        b.iter(|| solve_normalized(&s, &curve, &count).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = ground_state, mass_curve, normalized
}
criterion_main!(benches);
