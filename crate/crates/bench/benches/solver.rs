use criterion::{criterion_group, criterion_main, Criterion};
use spwt_core::geometry::draw_allocation;
use spwt_core::optimizer::{
    build_covariances, design_from_covariances, sca_solve, solve_maxmin_ratio, DesignGeometry, MaxMinRatioProblem,
};
use spwt_core::{ScenarioConfig, Scheme, SolverSettings};

fn reference_slnr() -> MaxMinRatioProblem {
    let cfg = ScenarioConfig::reference();
    let alloc = draw_allocation(&cfg, 0).unwrap();
    let covs = build_covariances(&cfg, &alloc, Scheme::Regional, &DesignGeometry::reference()).unwrap();
    MaxMinRatioProblem::slnr(&cfg, &covs.desired, &covs.wiretap).unwrap()
}

fn solvers(c: &mut Criterion) {
    let problem = reference_slnr();
    let settings = SolverSettings::default();
    let mut group = c.benchmark_group("regional_slnr");
    group.sample_size(20);
    group.bench_function("bisection", |b| b.iter(|| solve_maxmin_ratio(&problem, &settings).unwrap()));
    group.bench_function("sca", |b| b.iter(|| sca_solve(&problem, &settings, 0).unwrap()));
    group.finish();
}

fn design(c: &mut Criterion) {
    let cfg = ScenarioConfig::reference();
    let alloc = draw_allocation(&cfg, 0).unwrap();
    let settings = SolverSettings::default();
    let mut group = c.benchmark_group("design_from_covariances");
    group.sample_size(20);
    for scheme in [Scheme::Regional, Scheme::Point(16), Scheme::NonRobust] {
        let covs = build_covariances(&cfg, &alloc, scheme, &DesignGeometry::reference()).unwrap();
        group.bench_function(scheme.to_string(), |b| {
            b.iter(|| design_from_covariances(&cfg, &covs, &settings, 0).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solvers, design);
criterion_main!(benches);
