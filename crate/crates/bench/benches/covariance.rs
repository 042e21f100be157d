use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spwt_core::geometry::draw_allocation;
use spwt_core::optimizer::{build_covariances, DesignGeometry};
use spwt_core::regions::{desired_region, regional_covariance};
use spwt_core::{QuadratureSpec, ScenarioConfig, Scheme};

fn regional_vs_step(c: &mut Criterion) {
    let cfg = ScenarioConfig::reference();
    let alloc = draw_allocation(&cfg, 0).unwrap();
    let g = DesignGeometry::reference();
    let region = desired_region(g.estimates[0], g.dtheta_max, g.dr_max, &g.window).unwrap();
    let mut group = c.benchmark_group("desired_region_covariance");
    for step_deg in [1.0, 0.5, 0.25] {
        let quad = QuadratureSpec::from_degrees(step_deg, 10.0 * step_deg).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(quad.node_count(&region)), &quad, |b, q| {
            b.iter(|| regional_covariance(&cfg, &alloc, &region, q))
        });
    }
    group.finish();
}

fn scheme_covariances(c: &mut Criterion) {
    let cfg = ScenarioConfig::reference();
    let alloc = draw_allocation(&cfg, 0).unwrap();
    let g = DesignGeometry::reference();
    let mut group = c.benchmark_group("scheme_covariances");
    group.sample_size(20);
    for scheme in [Scheme::Regional, Scheme::Point(4), Scheme::Point(64), Scheme::NonRobust] {
        group.bench_function(scheme.to_string(), |b| {
            b.iter(|| build_covariances(&cfg, &alloc, scheme, &g).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, regional_vs_step, scheme_covariances);
criterion_main!(benches);
