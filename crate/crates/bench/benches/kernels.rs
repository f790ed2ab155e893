use std::hint::black_box;

use alrh::asympt::{predict, AsymptOptions};
use alrh::lattice::step_rk4;
use alrh::rhsolver::{build_three_circle_problem, solve_bc, ContourOptions};
use alrh::scattering::{transfer_scattering, CircleGrid, ExactScattering, Reflectionless};
use alrh::soliton::{pole_removal, soliton_q};
use alrh::specfun::{log_gamma, pc_model, pcf_d};
use alrh::spectrum::DiscreteSpectrum;
use alrh::tfun::TFunctionContext;
use alrh::C64;
use alrh_bench::{pulse, two_poles};
use criterion::{criterion_group, criterion_main, Criterion};

fn lattice(c: &mut Criterion) {
    let s = pulse(0.3, 8.0, 512);
    c.bench_function("rk4_step_1025_sites", |b| b.iter(|| step_rk4(black_box(&s), 1e-3).unwrap()));
}

fn scattering(c: &mut Criterion) {
    let s = pulse(0.3, 8.0, 64);
    let g = CircleGrid::uniform(1024).unwrap();
    c.bench_function("transfer_scattering_1024", |b| b.iter(|| transfer_scattering(black_box(&s), &g).unwrap()));
}

fn specfun(c: &mut Criterion) {
    c.bench_function("log_gamma", |b| b.iter(|| log_gamma(black_box(C64::new(0.3, -2.7))).unwrap()));
    c.bench_function("pcf_d", |b| b.iter(|| pcf_d(black_box(C64::new(0.0, 0.11)), black_box(C64::new(3.0, 2.0))).unwrap()));
    c.bench_function("pc_model", |b| b.iter(|| pc_model(black_box(C64::new(4.0, 1.0)), C64::new(1.0, 0.0)).unwrap()));
}

fn soliton(c: &mut Criterion) {
    let spec = two_poles();
    c.bench_function("soliton_q_two_poles", |b| b.iter(|| soliton_q(&spec, black_box(3), 1.5).unwrap()));
}

fn rhsolver(c: &mut Criterion) {
    let spec = two_poles();
    let model = Reflectionless { spectrum: spec.clone() };
    let f = pole_removal(&model, &spec).unwrap();
    let mut g = c.benchmark_group("solve_bc");
    g.sample_size(10);
    for modes in [64, 128, 256] {
        let p = build_three_circle_problem(&model, &f, 2, 0.5, ContourOptions { modes, rho: None }).unwrap();
        g.bench_function(format!("modes_{modes}"), |b| b.iter(|| solve_bc(black_box(&p)).unwrap()));
    }
    g.finish();
}

fn asymptotics(c: &mut Criterion) {
    let model = ExactScattering { state: pulse(0.1, 4.0, 24) };
    let ctx = TFunctionContext::new(&model, DiscreteSpectrum::empty(), 0.3).unwrap();
    c.bench_function("t_eval", |b| b.iter(|| ctx.t_eval(black_box(C64::new(0.4, 0.2))).unwrap()));
    let mut g = c.benchmark_group("predict");
    g.sample_size(10);
    g.bench_function("region_i", |b| b.iter(|| predict(&model, &DiscreteSpectrum::empty(), black_box(120), 200.0, AsymptOptions::default()).unwrap()));
    g.finish();
}

criterion_group!(benches, lattice, scattering, specfun, soliton, rhsolver, asymptotics);
criterion_main!(benches);
