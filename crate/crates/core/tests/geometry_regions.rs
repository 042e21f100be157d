use proptest::prelude::*;
use spwt_core::geometry::{draw_allocation, effective_geometry, steering_vector};
use spwt_core::linalg::{hermitian_eigen, trace_re};
use spwt_core::optimizer::DesignGeometry;
use spwt_core::regions::{mainlobe_widths, regional_covariance, sample_points_sidelobe};
use spwt_core::{GroundPosition, QuadratureSpec, RegionRect, ScenarioConfig};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn reference_desired_regions() {
    let regions = DesignGeometry::reference().desired_regions().unwrap();
    let got: Vec<[f64; 4]> = regions
        .iter()
        .map(|r| [r.angle_lo.to_degrees(), r.angle_hi.to_degrees(), r.range_lo, r.range_hi])
        .collect();
    for (g, e) in got.iter().zip([[39.0, 51.0, 250.0, 350.0], [114.0, 126.0, 550.0, 650.0]]) {
        for (x, y) in g.iter().zip(e) {
            assert!(close(*x, y, 1e-9), "{g:?} vs {e:?}");
        }
    }
}

#[test]
fn reference_main_lobe_covers_error_box() {
    let lobe = mainlobe_widths(&ScenarioConfig::reference());
    // 2 lambda / (N_T d) with d = lambda / 2, and c / B at 5 MHz.
    assert!(close(lobe.theta_bw, 4.0 / 16.0, 1e-15));
    assert!(close(lobe.range_halfwidth, 3.0e8 / 5.0e6, 1e-9));
    assert!(lobe.contains_error_region(6f64.to_radians(), 50.0));
}

#[test]
fn sidelobe_points_around_first_user() {
    let cfg = ScenarioConfig::reference();
    let pts: Vec<GroundPosition> =
        sample_points_sidelobe(&cfg, GroundPosition::from_degrees(45.0, 300.0), &RegionRect::reference_window())
            .positions()
            .collect();
    let c = 45f64.to_radians().cos();
    assert!(close(pts[0].angle, (c - 3.0 / 16.0).acos(), 1e-12));
    assert!(close(pts[1].angle, (c + 3.0 / 16.0).acos(), 1e-12));
    assert!(close(pts[2].range, 300.0 - 90.0, 1e-9));
    assert!(close(pts[3].range, 300.0 + 90.0, 1e-9));
}

#[test]
fn ground_level_geometry_is_identity() {
    let (theta, r) = effective_geometry(GroundPosition::from_degrees(30.0, 400.0), 0.0);
    assert!(close(r, 400.0, 1e-12));
    assert!(close(theta, 30f64.to_radians(), 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_vectors_have_unit_norm(
        angle in 0.0f64..180.0,
        range in 1.0f64..1000.0,
        height in 0.0f64..300.0,
        seed in 0u64..1000,
    ) {
        let mut cfg = ScenarioConfig::reference();
        cfg.uav_height = height;
        let alloc = draw_allocation(&cfg, seed).unwrap();
        let h = steering_vector(&cfg, &alloc, GroundPosition::from_degrees(angle, range));
        prop_assert!((h.as_vector().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regional_covariance_invariants(
        a0 in 0.0f64..170.0,
        da in 0.5f64..10.0,
        r0 in 0.0f64..900.0,
        dr in 5.0f64..100.0,
        seed in 0u64..1000,
    ) {
        let cfg = ScenarioConfig::reference();
        let alloc = draw_allocation(&cfg, seed).unwrap();
        let rect = RegionRect::new(a0.to_radians(), (a0 + da).to_radians(), r0, r0 + dr).unwrap();
        let c = regional_covariance(&cfg, &alloc, &rect, &QuadratureSpec::from_degrees(0.5, 5.0).unwrap());
        let m = &c.entries;
        let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(herm <= 1e-12);
        let tr = trace_re(m);
        prop_assert!(hermitian_eigen(m).bottom() >= -1e-9 * tr);
        prop_assert!((c.measure - rect.angle_width() * rect.range_width()).abs() <= 1e-9 * c.measure);
        for i in 0..cfg.n_antennas {
            let expect = c.measure / cfg.n_antennas as f64;
            prop_assert!((m[(i, i)].re - expect).abs() <= 1e-9 * expect && m[(i, i)].im.abs() <= 1e-9 * expect);
        }
    }
}
