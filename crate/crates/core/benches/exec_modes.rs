//! Sequential against rayon execution for the kernels that take an `ExecMode`.
//!
//! Build with `--no-default-features` to see the fallback: both modes then run
//! the same sequential code.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use loopcont::continuation::{self, LiftConfig, SlideConfig};
use loopcont::deform::{self, AlphaSpec, EtaSpec, PushConfig, PushProblem};
use loopcont::disc::AnalyticDisc;
use loopcont::monodromy::{self, FEvalConfig};
use loopcont::quadric::RegionSpec;
use loopcont::{suite, ExecMode, Tolerances, C64, V3};

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn f_eval(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut rng = suite::rng(1);
    let x = suite::random_m_prime_loop(&mut rng, 16, &tol).unwrap();
    let xs = x.samples(128);
    let cfg = FEvalConfig::default();
    let mut group = c.benchmark_group("f_eval");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| monodromy::f_eval_samples(black_box(&xs), &cfg, &tol, exec).unwrap())
        });
    }
    group.finish();
}

fn lift_and_slide(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut rng = suite::rng(2);
    let curve = suite::random_closed_m_prime_curve(&mut rng, 41, 16, &tol).unwrap();
    let lcfg = LiftConfig { m_deg: 16, ..LiftConfig::default() };
    let fcfg = FEvalConfig::default();
    let f = |s: &[V3]| Ok(monodromy::f_eval_samples(s, &fcfg, &tol, ExecMode::Sequential)?.value);
    let mut group = c.benchmark_group("continuation");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("lift", name), &exec, |b, &exec| {
            b.iter(|| continuation::build_regular_lift(&curve, &lcfg, &tol, exec).unwrap())
        });
    }
    let lift = continuation::build_regular_lift(&curve, &lcfg, &tol, ExecMode::Sequential).unwrap();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("slide", name), &exec, |b, &exec| {
            b.iter(|| continuation::slide(&f, &curve, &lift, &SlideConfig::default(), &tol, exec).unwrap())
        });
    }
    group.finish();
}

fn push_disc(c: &mut Criterion) {
    let tol = Tolerances::default();
    let z = [C64::new(2f64.sqrt(), 0.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)];
    let problem = PushProblem {
        disc: AnalyticDisc::constant(z, 1, 8).unwrap(),
        alpha: AlphaSpec::Fraction { of_delta0: 0.5 },
        eta: EtaSpec::Fraction { of_delta0: 0.1 },
        j_exponent: 128,
        region: RegionSpec::new(2.0, 5.0, 3.0).unwrap(),
    };
    let cfg = PushConfig::default();
    let mut group = c.benchmark_group("push_disc");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| deform::push_disc(&problem, &cfg, &tol, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, f_eval, lift_and_slide, push_disc);
criterion_main!(benches);
