use criterion::{black_box, criterion_group, criterion_main, Criterion};

use botbench_bench::{bench_world, counting_program, BENCH_CHECK};
use botbench_core::lang::DEFAULT_STEP_BUDGET;
use botbench_core::rtl::parse_rtl;
use botbench_core::sim::StochasticWorldSpec;
use botbench_core::{check, evaluator, simulate, simulate_stochastic};

fn bench_simulate(c: &mut Criterion) {
    let world = bench_world();
    let program = counting_program();
    c.bench_function("simulate/counting_program", |b| {
        b.iter(|| {
            let result = simulate(black_box(&program), &world, DEFAULT_STEP_BUDGET);
            black_box(result.trace.elements.len())
        })
    });
    let spec = StochasticWorldSpec::from_world(&world);
    c.bench_function("simulate_stochastic/counting_program", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed = seed.wrapping_add(1);
            let result =
                simulate_stochastic(black_box(&program), &spec, seed, DEFAULT_STEP_BUDGET);
            black_box(result.outcome.is_success())
        })
    });
}

fn bench_check(c: &mut Criterion) {
    let world = bench_world();
    let program = counting_program();
    let trace = simulate(&program, &world, DEFAULT_STEP_BUDGET).trace;
    let rtl = parse_rtl(BENCH_CHECK).expect("bench check parses");
    c.bench_function("check/four_clauses", |b| {
        b.iter(|| black_box(check(black_box(&trace), &rtl).verdict))
    });
    c.bench_function("parse_rtl/four_clauses", |b| {
        b.iter(|| black_box(parse_rtl(black_box(BENCH_CHECK)).unwrap().clauses.len()))
    });
}

fn bench_pass_at_k(c: &mut Criterion) {
    c.bench_function("pass_at_k/n50", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for k in 1..=50 {
                acc += evaluator::pass_at_k(50, 20, k).unwrap();
            }
            black_box(acc)
        })
    });
}

criterion_group!(benches, bench_simulate, bench_check, bench_pass_at_k);
criterion_main!(benches);
