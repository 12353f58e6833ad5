use criterion::{black_box, criterion_group, criterion_main, Criterion};
use fujita_core::{InitialDatum, KernelEvaluator, ProblemParams};

fn evaluator() -> KernelEvaluator {
    KernelEvaluator::with_defaults(InitialDatum::tent(), ProblemParams::new(1.0 / 3.0).unwrap())
        .unwrap()
}

fn kernels(c: &mut Criterion) {
    let ev = evaluator();
    c.bench_function("heat closed form", |b| {
        b.iter(|| ev.heat(black_box(0.7), black_box(3.0)).unwrap())
    });
    c.bench_function("heat quadrature", |b| {
        b.iter(|| ev.heat_quadrature(black_box(0.7), black_box(3.0)).unwrap())
    });
    c.bench_function("linearized W", |b| {
        b.iter(|| ev.linearized(black_box(0.7), black_box(20.0)).unwrap())
    });
    // construction includes the excess mass and its window
    c.bench_function("evaluator setup", |b| b.iter(evaluator));
}

criterion_group!(benches, kernels);
criterion_main!(benches);
