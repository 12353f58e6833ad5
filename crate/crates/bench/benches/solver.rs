use criterion::{criterion_group, criterion_main, Criterion};
use fujita_core::config::RunConfig;
use fujita_core::solver::run;

fn short_run(c: &mut Criterion) {
    let cfg: RunConfig = "p = 0.5\ndx = 0.05\ndt = 0.01\nt_end = 5\noutput_times = 1, 5\n"
        .parse()
        .unwrap();
    let params = cfg.single_params().unwrap();
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("tent to t = 5", |b| {
        b.iter(|| run(&cfg.datum, params, &cfg.sim).unwrap())
    });
    group.finish();
}

criterion_group!(benches, short_run);
criterion_main!(benches);
