//! Desired and wiretap regions, sample-point layouts, and the leakage
//! covariances `sum h h^H` built over them.

use num_complex::Complex64;

use crate::error::ConfigError;
use crate::geometry::{steering_vector, GroundPosition, ScenarioConfig, SubcarrierAllocation};
use crate::linalg::{CMat, CVec};
use crate::SPEED_OF_LIGHT;

/// Closed rectangle `[angle_lo, angle_hi] x [range_lo, range_hi]` in the
/// (radians, meters) plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionRect {
    pub angle_lo: f64,
    pub angle_hi: f64,
    pub range_lo: f64,
    pub range_hi: f64,
}

impl RegionRect {
    pub fn new(angle_lo: f64, angle_hi: f64, range_lo: f64, range_hi: f64) -> Result<Self, ConfigError> {
        if !(angle_lo < angle_hi && range_lo < range_hi) {
            return Err(ConfigError::EmptyRegion);
        }
        if !(angle_lo.is_finite() && angle_hi.is_finite() && range_lo.is_finite() && range_hi.is_finite()) {
            return Err(ConfigError::invalid("region", "bounds must be finite"));
        }
        Ok(Self {
            angle_lo,
            angle_hi,
            range_lo,
            range_hi,
        })
    }

    /// Observation window `[0, theta_max] x [0, r_max]`.
    pub fn window(theta_max: f64, r_max: f64) -> Result<Self, ConfigError> {
        if !(theta_max > 0.0 && theta_max <= std::f64::consts::PI + 1e-12) {
            return Err(ConfigError::invalid("theta_max", "must lie in (0, pi]"));
        }
        if r_max.is_nan() || r_max <= 0.0 {
            return Err(ConfigError::invalid("r_max", "must be positive"));
        }
        Self::new(0.0, theta_max, 0.0, r_max)
    }

    /// The reference window: 180 degrees by 1000 m.
    pub fn reference_window() -> Self {
        Self::window(std::f64::consts::PI, 1000.0).expect("valid window")
    }

    pub fn angle_width(&self) -> f64 {
        self.angle_hi - self.angle_lo
    }

    pub fn range_width(&self) -> f64 {
        self.range_hi - self.range_lo
    }

    /// Area in radian-meters.
    pub fn measure(&self) -> f64 {
        self.angle_width() * self.range_width()
    }

    pub fn contains(&self, pos: GroundPosition) -> bool {
        pos.angle >= self.angle_lo
            && pos.angle <= self.angle_hi
            && pos.range >= self.range_lo
            && pos.range <= self.range_hi
    }

    pub fn contains_rect(&self, other: &RegionRect) -> bool {
        other.angle_lo >= self.angle_lo
            && other.angle_hi <= self.angle_hi
            && other.range_lo >= self.range_lo
            && other.range_hi <= self.range_hi
    }

    pub fn center(&self) -> GroundPosition {
        GroundPosition::new(
            0.5 * (self.angle_lo + self.angle_hi),
            0.5 * (self.range_lo + self.range_hi),
        )
    }

    /// Nearest point of the rectangle.
    pub fn clamp(&self, pos: GroundPosition) -> GroundPosition {
        GroundPosition::new(
            pos.angle.clamp(self.angle_lo, self.angle_hi),
            pos.range.clamp(self.range_lo, self.range_hi),
        )
    }
}

/// Step sizes of the midpoint quadrature grid (radians, meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub angle_step: f64,
    pub range_step: f64,
}

impl QuadratureSpec {
    /// Default grid inside desired regions: 0.25 degree by 2.5 m.
    pub const DESIRED_DEFAULT_DEG_M: (f64, f64) = (0.25, 2.5);
    /// Default grid over the observation window: 1 degree by 10 m.
    pub const WINDOW_DEFAULT_DEG_M: (f64, f64) = (1.0, 10.0);

    pub fn new(angle_step: f64, range_step: f64) -> Result<Self, ConfigError> {
        if !(angle_step.is_finite() && angle_step > 0.0) {
            return Err(ConfigError::invalid("angle_step", "must be positive"));
        }
        if !(range_step.is_finite() && range_step > 0.0) {
            return Err(ConfigError::invalid("range_step", "must be positive"));
        }
        Ok(Self { angle_step, range_step })
    }

    pub fn from_degrees(angle_step_deg: f64, range_step: f64) -> Result<Self, ConfigError> {
        Self::new(angle_step_deg.to_radians(), range_step)
    }

    pub fn desired_default() -> Self {
        let (a, r) = Self::DESIRED_DEFAULT_DEG_M;
        Self::from_degrees(a, r).expect("valid default")
    }

    pub fn window_default() -> Self {
        let (a, r) = Self::WINDOW_DEFAULT_DEG_M;
        Self::from_degrees(a, r).expect("valid default")
    }

    pub fn halved(&self) -> Self {
        Self {
            angle_step: self.angle_step / 2.0,
            range_step: self.range_step / 2.0,
        }
    }

    /// Number of quadrature nodes covering `rect`, the `N_p` of the cost model.
    pub fn node_count(&self, rect: &RegionRect) -> usize {
        let g = Grid::new(rect, self);
        g.angles.len() * g.ranges.len()
    }
}

/// Uniform midpoint grid. Step counts are rounded up and the steps shrunk so
/// the cells tile the rectangle exactly.
#[derive(Debug, Clone)]
pub struct Grid {
    pub angles: Vec<f64>,
    pub ranges: Vec<f64>,
    pub cell_area: f64,
}

impl Grid {
    pub fn new(rect: &RegionRect, quad: &QuadratureSpec) -> Self {
        fn centers(lo: f64, width: f64, step: f64) -> (Vec<f64>, f64) {
            let n = ((width / step) - 1e-9).ceil().max(1.0) as usize;
            let h = width / n as f64;
            ((0..n).map(|i| lo + (i as f64 + 0.5) * h).collect(), h)
        }
        let (angles, ha) = centers(rect.angle_lo, rect.angle_width(), quad.angle_step);
        let (ranges, hr) = centers(rect.range_lo, rect.range_width(), quad.range_step);
        Self {
            angles,
            ranges,
            cell_area: ha * hr,
        }
    }

    /// Nodes in row-major order: angle outer, range inner.
    pub fn nodes(&self) -> impl Iterator<Item = GroundPosition> + '_ {
        self.angles
            .iter()
            .flat_map(move |&a| self.ranges.iter().map(move |&r| GroundPosition::new(a, r)))
    }

    pub fn len(&self) -> usize {
        self.angles.len() * self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Weighted sum of steering outer products.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub entries: CMat,
    /// Total quadrature weight (radian-meters for regions, point count for
    /// point sets).
    pub measure: f64,
    /// Number of outer products accumulated.
    pub nodes: usize,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Accumulated multiply-add work, `nodes * (2 N_T - 1)`.
    pub fn op_count(&self) -> u64 {
        self.nodes as u64 * (2 * self.dim() as u64 - 1)
    }
}

/// Accumulates `sum_i w_i h_i h_i^H` in a fixed left-to-right order over the
/// upper triangle, mirrored at the end so the result is exactly Hermitian.
pub(crate) struct Accumulator {
    n: usize,
    upper: Vec<Complex64>,
    measure: f64,
    nodes: usize,
}

impl Accumulator {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            upper: vec![Complex64::new(0.0, 0.0); n * n],
            measure: 0.0,
            nodes: 0,
        }
    }

    pub(crate) fn add(&mut self, h: &CVec, weight: f64) {
        let n = self.n;
        for i in 0..n {
            let hi = h[i] * weight;
            let row = &mut self.upper[i * n..(i + 1) * n];
            for j in i..n {
                row[j] += hi * h[j].conj();
            }
        }
        self.measure += weight;
        self.nodes += 1;
    }

    pub(crate) fn finish(self) -> CovarianceMatrix {
        let n = self.n;
        let upper = &self.upper;
        let entries = CMat::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(upper[i * n + i].re, 0.0)
            } else if i < j {
                upper[i * n + j]
            } else {
                upper[j * n + i].conj()
            }
        });
        CovarianceMatrix {
            entries,
            measure: self.measure,
            nodes: self.nodes,
        }
    }
}

/// Covariance over arbitrary weighted nodes; the kernel shared by all builders.
pub fn weighted_covariance(
    cfg: &ScenarioConfig,
    alloc: &SubcarrierAllocation,
    nodes: impl IntoIterator<Item = (GroundPosition, f64)>,
) -> CovarianceMatrix {
    let mut acc = Accumulator::new(alloc.len());
    for (pos, weight) in nodes {
        let h = steering_vector(cfg, alloc, pos);
        acc.add(h.as_vector(), weight);
    }
    acc.finish()
}

/// Error rectangle `[theta_hat +- dtheta] x [r_hat +- dr]` clipped to the window.
pub fn desired_region(
    est: GroundPosition,
    dtheta_max: f64,
    dr_max: f64,
    window: &RegionRect,
) -> Result<RegionRect, ConfigError> {
    if !(dtheta_max > 0.0 && dr_max > 0.0) {
        return Err(ConfigError::invalid("maximal estimation error", "bounds must be positive"));
    }
    if !window.contains(est) {
        return Err(ConfigError::invalid("estimate", "position lies outside the observation window"));
    }
    RegionRect::new(
        (est.angle - dtheta_max).max(window.angle_lo),
        (est.angle + dtheta_max).min(window.angle_hi),
        (est.range - dr_max).max(window.range_lo),
        (est.range + dr_max).min(window.range_hi),
    )
}

/// Midpoint-rule approximation of the integral of `h h^H` over `region`.
pub fn regional_covariance(
    cfg: &ScenarioConfig,
    alloc: &SubcarrierAllocation,
    region: &RegionRect,
    quad: &QuadratureSpec,
) -> CovarianceMatrix {
    let grid = Grid::new(region, quad);
    let w = grid.cell_area;
    weighted_covariance(cfg, alloc, grid.nodes().map(|p| (p, w)))
}

/// Window grid nodes whose cell centres fall outside every desired region.
pub fn wiretap_nodes(
    window: &RegionRect,
    desired: &[RegionRect],
    quad: &QuadratureSpec,
) -> (Vec<GroundPosition>, f64) {
    let grid = Grid::new(window, quad);
    let nodes = grid
        .nodes()
        .filter(|p| desired.iter().all(|d| !d.contains(*p)))
        .collect();
    (nodes, grid.cell_area)
}

/// Integral of `h h^H` over the window minus the union of desired regions.
pub fn wiretap_covariance(
    cfg: &ScenarioConfig,
    alloc: &SubcarrierAllocation,
    window: &RegionRect,
    desired: &[RegionRect],
    quad: &QuadratureSpec,
) -> Result<CovarianceMatrix, ConfigError> {
    let (nodes, w) = wiretap_nodes(window, desired, quad);
    if nodes.is_empty() {
        return Err(ConfigError::EmptyWiretap);
    }
    Ok(weighted_covariance(cfg, alloc, nodes.into_iter().map(|p| (p, w))))
}

/// Main-lobe size of the FDA beampattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainLobe {
    /// Angular width `2 lambda / (N_T d)`.
    pub theta_bw: f64,
    /// Range half-width `c / B`.
    pub range_halfwidth: f64,
}

impl MainLobe {
    /// Whether an error rectangle of half-sizes `(dtheta_max, dr_max)` fits
    /// inside the main lobe: `lambda/(N_T d) > dtheta_max` and `c/B > dr_max`.
    pub fn contains_error_region(&self, dtheta_max: f64, dr_max: f64) -> bool {
        self.theta_bw / 2.0 > dtheta_max && self.range_halfwidth > dr_max
    }
}

pub fn mainlobe_widths(cfg: &ScenarioConfig) -> MainLobe {
    MainLobe {
        theta_bw: 2.0 * cfg.wavelength() / (cfg.n_antennas as f64 * cfg.element_spacing),
        range_halfwidth: SPEED_OF_LIGHT / cfg.bandwidth,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointRole {
    DesiredSample,
    SidelobeEavesdrop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub position: GroundPosition,
    pub role: PointRole,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SamplePointSet {
    pub points: Vec<SamplePoint>,
}

impl SamplePointSet {
    fn with_role(positions: impl IntoIterator<Item = GroundPosition>, role: PointRole) -> Self {
        Self {
            points: positions
                .into_iter()
                .map(|position| SamplePoint { position, role })
                .collect(),
        }
    }

    pub fn positions(&self) -> impl Iterator<Item = GroundPosition> + '_ {
        self.points.iter().map(|p| p.position)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn extend(&mut self, other: SamplePointSet) {
        self.points.extend(other.points);
    }
}

/// The four edge-midpoints `(theta_hat +- dtheta, r_hat)`, `(theta_hat, r_hat +- dr)`.
pub fn sample_points_desired(
    est: GroundPosition,
    dtheta_max: f64,
    dr_max: f64,
    window: &RegionRect,
) -> SamplePointSet {
    let GroundPosition { angle, range } = est;
    SamplePointSet::with_role(
        [
            GroundPosition::new(angle - dtheta_max, range),
            GroundPosition::new(angle + dtheta_max, range),
            GroundPosition::new(angle, range - dr_max),
            GroundPosition::new(angle, range + dr_max),
        ]
        .map(|p| window.clamp(p)),
        PointRole::DesiredSample,
    )
}

/// `side x side` uniform lattice spanning the error rectangle, edges included.
pub fn sample_points_lattice(
    est: GroundPosition,
    dtheta_max: f64,
    dr_max: f64,
    side: usize,
    window: &RegionRect,
) -> SamplePointSet {
    let offset = |i: usize| {
        if side == 1 {
            0.0
        } else {
            2.0 * i as f64 / (side - 1) as f64 - 1.0
        }
    };
    let positions = (0..side).flat_map(|i| {
        (0..side).map(move |j| {
            GroundPosition::new(est.angle + offset(i) * dtheta_max, est.range + offset(j) * dr_max)
        })
    });
    SamplePointSet::with_role(
        positions.map(|p| window.clamp(p)).collect::<Vec<_>>(),
        PointRole::DesiredSample,
    )
}

/// Desired sample layout for a point count: 1 is the estimate itself, 4 the
/// edge midpoints, and any larger perfect square a lattice over the rectangle.
pub fn desired_points(
    est: GroundPosition,
    dtheta_max: f64,
    dr_max: f64,
    n_points: usize,
    window: &RegionRect,
) -> Result<SamplePointSet, ConfigError> {
    match n_points {
        1 => Ok(sample_points_lattice(est, dtheta_max, dr_max, 1, window)),
        4 => Ok(sample_points_desired(est, dtheta_max, dr_max, window)),
        n => {
            let side = (n as f64).sqrt().round() as usize;
            if side >= 3 && side * side == n {
                Ok(sample_points_lattice(est, dtheta_max, dr_max, side, window))
            } else {
                Err(ConfigError::invalid(
                    "points",
                    format!("{n} is not 1, 4, or a perfect square of at least 9"),
                ))
            }
        }
    }
}

/// First-sidelobe maxima around an estimate: two along angle at `r_hat` and
/// two along range at `theta_hat`.
pub fn sample_points_sidelobe(
    cfg: &ScenarioConfig,
    est: GroundPosition,
    window: &RegionRect,
) -> SamplePointSet {
    let shift = 3.0 / cfg.n_antennas as f64;
    let c = est.angle.cos();
    let dr = 3.0 * SPEED_OF_LIGHT / (2.0 * cfg.bandwidth);
    SamplePointSet::with_role(
        [
            GroundPosition::new((c - shift).clamp(-1.0, 1.0).acos(), est.range),
            GroundPosition::new((c + shift).clamp(-1.0, 1.0).acos(), est.range),
            GroundPosition::new(est.angle, est.range - dr),
            GroundPosition::new(est.angle, est.range + dr),
        ]
        .map(|p| window.clamp(p)),
        PointRole::SidelobeEavesdrop,
    )
}

/// Unweighted `sum_i h(p_i) h(p_i)^H`; independent of any quadrature setting.
pub fn point_covariance(
    cfg: &ScenarioConfig,
    alloc: &SubcarrierAllocation,
    points: &SamplePointSet,
) -> CovarianceMatrix {
    weighted_covariance(cfg, alloc, points.positions().map(|p| (p, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::draw_allocation;
    use crate::linalg::{hermitian_eigen, is_hermitian, outer, trace_re};
    use proptest::prelude::*;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    fn window() -> RegionRect {
        RegionRect::reference_window()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn desired_regions_for_reference_users() {
        let r = desired_region(GroundPosition::from_degrees(45.0, 300.0), deg(6.0), 50.0, &window()).unwrap();
        assert!(close(r.angle_lo, deg(39.0), 1e-12) && close(r.angle_hi, deg(51.0), 1e-12));
        assert!(close(r.range_lo, 250.0, 1e-12) && close(r.range_hi, 350.0, 1e-12));
        let r = desired_region(GroundPosition::from_degrees(120.0, 600.0), deg(6.0), 50.0, &window()).unwrap();
        assert!(close(r.angle_lo, deg(114.0), 1e-12) && close(r.angle_hi, deg(126.0), 1e-12));
        assert!(close(r.range_lo, 550.0, 1e-12) && close(r.range_hi, 650.0, 1e-12));
    }

    #[test]
    fn desired_region_clipped_at_window_edge() {
        let r = desired_region(GroundPosition::from_degrees(2.0, 300.0), deg(6.0), 50.0, &window()).unwrap();
        assert_eq!(r.angle_lo, 0.0);
        assert!(close(r.angle_hi, deg(8.0), 1e-12));
    }

    #[test]
    fn desired_region_rejects_outside_estimate() {
        let e = desired_region(GroundPosition::from_degrees(45.0, 1200.0), deg(6.0), 50.0, &window());
        assert!(e.is_err());
    }

    #[test]
    fn single_node_region_is_outer_product() {
        let cfg = ScenarioConfig::reference();
        let alloc = draw_allocation(&cfg, 1).unwrap();
        // one 0.01 rad by 100 m cell has unit weight
        let region = RegionRect::new(0.5, 0.51, 200.0, 300.0).unwrap();
        let quad = QuadratureSpec::new(0.01, 100.0).unwrap();
        let cov = regional_covariance(&cfg, &alloc, &region, &quad);
        let h = steering_vector(&cfg, &alloc, region.center());
        let expected = outer(h.as_vector());
        assert!((&cov.entries - &expected).norm() < 1e-12);
        assert_eq!(cov.nodes, 1);
    }

    #[test]
    fn regional_trace_equals_area() {
        let cfg = ScenarioConfig::reference();
        let alloc = draw_allocation(&cfg, 2).unwrap();
        let region = desired_region(GroundPosition::from_degrees(45.0, 300.0), deg(6.0), 50.0, &window()).unwrap();
        let cov = regional_covariance(&cfg, &alloc, &region, &QuadratureSpec::desired_default());
        let expected = deg(12.0) * 100.0;
        assert!((trace_re(&cov.entries) - expected).abs() < 1e-9 * expected);
        assert!((cov.measure - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn point_covariance_matches_unit_weight_grid() {
        let cfg = ScenarioConfig::reference();
        let alloc = draw_allocation(&cfg, 3).unwrap();
        let region = RegionRect::new(1.0, 1.01, 200.0, 600.0).unwrap();
        let quad = QuadratureSpec::new(0.01, 100.0).unwrap();
        let grid_cov = regional_covariance(&cfg, &alloc, &region, &quad);
        let points = SamplePointSet::with_role(
            [250.0, 350.0, 450.0, 550.0].map(|r| GroundPosition::new(1.005, r)),
            PointRole::DesiredSample,
        );
        let pt_cov = point_covariance(&cfg, &alloc, &points);
        assert!((&grid_cov.entries - &pt_cov.entries).norm() < 1e-12);
        assert_eq!(pt_cov.measure, 4.0);
        assert!((trace_re(&pt_cov.entries) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn wiretap_without_desired_regions_is_full_window() {
        let cfg = ScenarioConfig::reference();
        let alloc = draw_allocation(&cfg, 4).unwrap();
        let quad = QuadratureSpec::from_degrees(5.0, 50.0).unwrap();
        let w = wiretap_covariance(&cfg, &alloc, &window(), &[], &quad).unwrap();
        let full = regional_covariance(&cfg, &alloc, &window(), &quad);
        assert_eq!(w, full);
    }

    #[test]
    fn wiretap_rejects_full_cover() {
        let cfg = ScenarioConfig::reference();
        let alloc = draw_allocation(&cfg, 4).unwrap();
        let quad = QuadratureSpec::window_default();
        let halves = [
            RegionRect::new(0.0, 1.6, 0.0, 1000.0).unwrap(),
            RegionRect::new(1.5, std::f64::consts::PI, 0.0, 1000.0).unwrap(),
        ];
        assert_eq!(
            wiretap_covariance(&cfg, &alloc, &window(), &halves, &quad),
            Err(ConfigError::EmptyWiretap)
        );
    }

    #[test]
    fn wiretap_measure_bookkeeping() {
        let cfg = ScenarioConfig::reference();
        let alloc = draw_allocation(&cfg, 5).unwrap();
        let quad = QuadratureSpec::window_default();
        let desired = [
            desired_region(GroundPosition::from_degrees(45.0, 300.0), deg(6.0), 50.0, &window()).unwrap(),
            desired_region(GroundPosition::from_degrees(120.0, 600.0), deg(6.0), 50.0, &window()).unwrap(),
        ];
        let w = wiretap_covariance(&cfg, &alloc, &window(), &desired, &quad).unwrap();
        let expected = std::f64::consts::PI * 1000.0 - 2.0 * deg(12.0) * 100.0;
        let cell = deg(1.0) * 10.0;
        assert!((w.measure - expected).abs() <= cell);
        assert!((trace_re(&w.entries) - w.measure).abs() < 1e-9 * w.measure);
    }

    #[test]
    fn mainlobe_reference_values() {
        let cfg = ScenarioConfig::reference();
        let lobe = mainlobe_widths(&cfg);
        assert!((lobe.theta_bw - 0.25).abs() < 1e-12);
        assert!((lobe.range_halfwidth - 60.0).abs() < 1e-9);
        assert!(lobe.contains_error_region(deg(6.0), 50.0));
        let mut wide = cfg.clone();
        wide.n_antennas = 32;
        assert!((mainlobe_widths(&wide).theta_bw - 0.125).abs() < 1e-12);
        wide.n_antennas = 64;
        let lobe64 = mainlobe_widths(&wide);
        assert!((lobe64.theta_bw - 0.0625).abs() < 1e-12);
        assert!(!lobe64.contains_error_region(deg(6.0), 50.0));
    }

    fn angles_deg(set: &SamplePointSet) -> Vec<(f64, f64)> {
        set.positions().map(|p| (p.angle.to_degrees(), p.range)).collect()
    }

    #[test]
    fn four_desired_points() {
        let pts = angles_deg(&sample_points_desired(GroundPosition::from_degrees(45.0, 300.0), deg(6.0), 50.0, &window()));
        let expected = [(39.0, 300.0), (51.0, 300.0), (45.0, 250.0), (45.0, 350.0)];
        for (p, e) in pts.iter().zip(expected) {
            assert!(close(p.0, e.0, 1e-9) && close(p.1, e.1, 1e-9), "{p:?} vs {e:?}");
        }
        let pts = angles_deg(&sample_points_desired(GroundPosition::from_degrees(120.0, 600.0), deg(6.0), 50.0, &window()));
        let expected = [(114.0, 600.0), (126.0, 600.0), (120.0, 550.0), (120.0, 650.0)];
        for (p, e) in pts.iter().zip(expected) {
            assert!(close(p.0, e.0, 1e-9) && close(p.1, e.1, 1e-9));
        }
        let est = GroundPosition::from_degrees(45.0, 300.0);
        let degenerate = sample_points_desired(est, 0.0, 0.0, &window());
        assert!(degenerate.positions().all(|p| p == est));
    }

    #[test]
    fn sidelobe_points() {
        let cfg = ScenarioConfig::reference();
        let pts = angles_deg(&sample_points_sidelobe(&cfg, GroundPosition::from_degrees(45.0, 300.0), &window()));
        let c45 = deg(45.0).cos();
        assert!(close(pts[0].0, (c45 - 0.1875).acos().to_degrees(), 1e-9));
        assert!(close(pts[1].0, (c45 + 0.1875).acos().to_degrees(), 1e-9));
        assert!(close(pts[0].0, 58.69, 0.01), "{:?}", pts[0]);
        assert!(close(pts[1].0, 26.54, 0.01), "{:?}", pts[1]);
        assert!(close(pts[2].1, 210.0, 1e-9) && close(pts[3].1, 390.0, 1e-9));
        let edge = angles_deg(&sample_points_sidelobe(&cfg, GroundPosition::from_degrees(10.0, 300.0), &window()));
        assert_eq!(edge[1].0, 0.0);
    }

    #[test]
    fn lattice_layouts() {
        let est = GroundPosition::from_degrees(45.0, 300.0);
        for n in [1, 4, 16, 64] {
            let set = desired_points(est, deg(6.0), 50.0, n, &window()).unwrap();
            assert_eq!(set.len(), n);
            let region = desired_region(est, deg(6.0), 50.0, &window()).unwrap();
            let grown = RegionRect::new(region.angle_lo - 1e-12, region.angle_hi + 1e-12, region.range_lo - 1e-9, region.range_hi + 1e-9).unwrap();
            assert!(set.positions().all(|p| grown.contains(p)));
        }
        assert!(desired_points(est, deg(6.0), 50.0, 5, &window()).is_err());
    }

    #[test]
    fn point_covariance_trace_counts_points() {
        let cfg = ScenarioConfig::reference();
        let alloc = draw_allocation(&cfg, 9).unwrap();
        let set = sample_points_desired(GroundPosition::from_degrees(45.0, 300.0), deg(6.0), 50.0, &window());
        let cov = point_covariance(&cfg, &alloc, &set);
        assert!((trace_re(&cov.entries) - 4.0).abs() < 1e-12);
        assert_eq!(cov.op_count(), 4 * 31);
    }

    fn max_abs(m: &CMat) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise change when both steps halve, relative to the largest entry.
    pub(crate) fn refinement_change(cfg: &ScenarioConfig, alloc: &SubcarrierAllocation, region: &RegionRect, quad: &QuadratureSpec) -> f64 {
        let coarse = regional_covariance(cfg, alloc, region, quad);
        let fine = regional_covariance(cfg, alloc, region, &quad.halved());
        max_abs(&(&fine.entries - &coarse.entries)) / max_abs(&fine.entries)
    }

    #[test]
    fn refinement_is_small_and_converging() {
        let cfg = ScenarioConfig::reference();
        for seed in 0..5 {
            let alloc = draw_allocation(&cfg, seed).unwrap();
            for est in [GroundPosition::from_degrees(45.0, 300.0), GroundPosition::from_degrees(120.0, 600.0)] {
                let region = desired_region(est, deg(6.0), 50.0, &window()).unwrap();
                let q = QuadratureSpec::desired_default();
                let d1 = refinement_change(&cfg, &alloc, &region, &q);
                let d2 = refinement_change(&cfg, &alloc, &region, &q.halved());
                assert!(d1 < 1e-3, "seed {seed}: change {d1}");
                assert!(d2 * 2.0 <= d1, "seed {seed}: {d2} vs {d1}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn covariance_invariants(
            seed in 0u64..10_000,
            a0 in 0.0..3.0f64,
            aw in 0.01..0.3f64,
            r0 in 0.0..900.0f64,
            rw in 5.0..100.0f64,
        ) {
            let cfg = ScenarioConfig::reference();
            let alloc = draw_allocation(&cfg, seed).unwrap();
            let region = RegionRect::new(a0, a0 + aw, r0, r0 + rw).unwrap();
            let cov = regional_covariance(&cfg, &alloc, &region, &QuadratureSpec::desired_default());
            prop_assert!(is_hermitian(&cov.entries, 1e-12));
            let eig = hermitian_eigen(&cov.entries);
            let tr = trace_re(&cov.entries);
            prop_assert!(eig.bottom() >= -1e-9 * tr);
            let diag = cov.measure / cfg.n_antennas as f64;
            for i in 0..cfg.n_antennas {
                prop_assert!((cov.entries[(i, i)].re - diag).abs() <= 1e-9 * diag);
            }
        }
    }
}
