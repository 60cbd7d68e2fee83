use std::hint::black_box;

use aqs_core::bath::{BathSpec, CutoffForm};
use aqs_core::bogoliubov::{diagonalize, generator_k, QuadraticHamiltonian};
use aqs_core::critical::critical_temperature;
use aqs_core::dynamics::{evolve_closed, evolve_dephasing};
use aqs_core::model::min_gap;
use aqs_core::rates::{golden_rule_two, incoherent_rate};
use aqs_core::renorm::phi;
use aqs_core::{DephasingParams, Process, Renormalizer, Schedule, ScheduleKind, SearchInstance};
use criterion::{criterion_group, criterion_main, Criterion};

fn model(c: &mut Criterion) {
    let inst = SearchInstance::new(1 << 20, 1.0).unwrap();
    c.bench_function("min_gap N=2^20", |b| b.iter(|| min_gap(black_box(&inst))));
}

fn renorm(c: &mut Criterion) {
    let bath = BathSpec::new(0.1, 1.5, 0.05);
    c.bench_function("renormalizer build (combined)", |b| {
        b.iter(|| Renormalizer::new(black_box(&bath), Process::Combined).unwrap())
    });
    let r = Renormalizer::new(&bath, Process::Combined).unwrap();
    c.bench_function("fixed point Δ=1e-6", |b| b.iter(|| r.solve(0.1, black_box(1e-6), 10.0)));
    c.bench_function("critical α Δ=1e-6", |b| b.iter(|| r.critical_alpha(black_box(1e-6), 10.0)));
    let hard = BathSpec::new(0.1, 2.0, 0.01).with_cutoff(1.0, CutoffForm::Hard);
    c.bench_function("φ(Ω) direct quadrature", |b| b.iter(|| phi(&hard, black_box(1e-6)).unwrap()));
}

fn critical(c: &mut Criterion) {
    let bath = BathSpec::new(0.05, 1.5, 0.0);
    let mut g = c.benchmark_group("critical");
    g.sample_size(10);
    g.bench_function("T* single N=2^32", |b| {
        b.iter(|| critical_temperature(black_box(1 << 32), &bath, 10.0, Process::Single).unwrap())
    });
    g.finish();
}

fn rates(c: &mut Criterion) {
    let bath = BathSpec::new(0.07, 2.0, 0.0).with_cutoff(1.0, CutoffForm::Hard);
    c.bench_function("Γ₂ golden rule", |b| b.iter(|| golden_rule_two(black_box(1e-3), &bath).unwrap()));
    let ohmic = BathSpec::new(1.0, 1.0, 0.1);
    let mut g = c.benchmark_group("rates");
    g.sample_size(10);
    g.bench_function("incoherent polaron rate", |b| {
        b.iter(|| incoherent_rate(black_box(1e-3), 0.02, &ohmic).unwrap())
    });
    g.finish();
}

fn dynamics(c: &mut Criterion) {
    let inst = SearchInstance::new(1 << 12, 1.0).unwrap();
    let local = Schedule::with_time(ScheduleKind::LocalAdiabatic, &inst, 400.0).unwrap();
    let linear = Schedule::with_time(ScheduleKind::Linear, &inst, 400.0).unwrap();
    c.bench_function("closed local N=2^12", |b| b.iter(|| evolve_closed(&inst, black_box(&local)).unwrap()));
    c.bench_function("closed linear N=2^12", |b| b.iter(|| evolve_closed(&inst, black_box(&linear)).unwrap()));
    let gamma = DephasingParams::new(0.05).unwrap();
    c.bench_function("dephasing local N=2^12", |b| {
        b.iter(|| evolve_dephasing(&inst, black_box(&local), gamma).unwrap())
    });
}

fn bogoliubov(c: &mut Criterion) {
    let omegas: Vec<f64> = (1..=16).map(|k| k as f64).collect();
    let h = QuadraticHamiltonian::diagonal(&omegas).unwrap();
    c.bench_function("diagonalize n=16 diagonal", |b| b.iter(|| diagonalize(black_box(&h)).unwrap()));
    let sq = QuadraticHamiltonian::two_mode_squeezing(1.0, 0.2).unwrap();
    let t = diagonalize(&sq).unwrap();
    c.bench_function("generator K two-mode", |b| b.iter(|| generator_k(black_box(&t)).unwrap()));
}

criterion_group!(benches, model, renorm, critical, rates, dynamics, bogoliubov);
criterion_main!(benches);
