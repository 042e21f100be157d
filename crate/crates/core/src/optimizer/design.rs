use std::fmt;
use std::str::FromStr;

use super::{
    rank_one_extract, sca_solve, solve_maxmin_ratio, MaxMinRatioProblem, SolverKind, SolverReport,
    SolverSettings,
};
use crate::error::{ConfigError, Error, SolverError};
use crate::geometry::{GroundPosition, ScenarioConfig, SubcarrierAllocation};
use crate::linalg::{normalized, CMat, CVec};
use crate::regions::{
    desired_points, desired_region, point_covariance, regional_covariance, sample_points_sidelobe,
    wiretap_covariance, CovarianceMatrix, QuadratureSpec, RegionRect, SamplePointSet,
};

/// How the desired and wiretap covariances are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Integrals over the error rectangles and the rest of the window.
    Regional,
    /// `n` desired sample points per user and four first-sidelobe
    /// eavesdropper points per user.
    Point(usize),
    /// One desired point per user at the estimate.
    NonRobust,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Regional => "regional",
            Scheme::Point(_) => "point",
            Scheme::NonRobust => "nonrobust",
        }
    }

    /// Desired points per user; 0 for the regional scheme.
    pub fn n_points(&self) -> usize {
        match self {
            Scheme::Regional => 0,
            Scheme::Point(n) => *n,
            Scheme::NonRobust => 1,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Point(n) => write!(f, "point-{n}"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Scheme {
    type Err = ConfigError;

    /// Accepts `regional`, `nonrobust`, `point` (four points) and `point-<n>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "regional" => Ok(Scheme::Regional),
            "nonrobust" | "non-robust" => Ok(Scheme::NonRobust),
            "point" => Ok(Scheme::Point(4)),
            _ => s
                .strip_prefix("point-")
                .and_then(|n| n.parse().ok())
                .filter(|n| *n > 0)
                .map(Scheme::Point)
                .ok_or_else(|| ConfigError::invalid("scheme", format!("unrecognized scheme `{s}`"))),
        }
    }
}

/// Estimates, error bounds, window, and quadrature settings for a design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignGeometry {
    pub estimates: Vec<GroundPosition>,
    pub dtheta_max: f64,
    pub dr_max: f64,
    pub window: RegionRect,
    pub region_quad: QuadratureSpec,
    pub window_quad: QuadratureSpec,
}

impl DesignGeometry {
    /// Two users at (45 deg, 300 m) and (120 deg, 600 m), 6 deg / 50 m errors.
    pub fn reference() -> Self {
        Self {
            estimates: vec![
                GroundPosition::from_degrees(45.0, 300.0),
                GroundPosition::from_degrees(120.0, 600.0),
            ],
            dtheta_max: 6f64.to_radians(),
            dr_max: 50.0,
            window: RegionRect::reference_window(),
            region_quad: QuadratureSpec::desired_default(),
            window_quad: QuadratureSpec::window_default(),
        }
    }

    pub fn desired_regions(&self) -> Result<Vec<RegionRect>, ConfigError> {
        self.estimates
            .iter()
            .map(|e| desired_region(*e, self.dtheta_max, self.dr_max, &self.window))
            .collect()
    }
}

/// Per-user desired covariances and the shared wiretap covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeCovariances {
    pub desired: Vec<CovarianceMatrix>,
    pub wiretap: CovarianceMatrix,
}

impl SchemeCovariances {
    /// Steering outer products accumulated across all matrices.
    pub fn nodes(&self) -> usize {
        self.desired.iter().map(|d| d.nodes).sum::<usize>() + self.wiretap.nodes
    }
}

pub fn build_covariances(
    cfg: &ScenarioConfig,
    alloc: &SubcarrierAllocation,
    scheme: Scheme,
    geometry: &DesignGeometry,
) -> Result<SchemeCovariances, ConfigError> {
    if geometry.estimates.is_empty() {
        return Err(ConfigError::NoUsers);
    }
    match scheme {
        Scheme::Regional => {
            let regions = geometry.desired_regions()?;
            let desired = regions
                .iter()
                .map(|r| regional_covariance(cfg, alloc, r, &geometry.region_quad))
                .collect();
            let wiretap =
                wiretap_covariance(cfg, alloc, &geometry.window, &regions, &geometry.window_quad)?;
            Ok(SchemeCovariances { desired, wiretap })
        }
        Scheme::Point(_) | Scheme::NonRobust => {
            let mut eaves = SamplePointSet::default();
            let mut desired = Vec::with_capacity(geometry.estimates.len());
            for est in &geometry.estimates {
                if !geometry.window.contains(*est) {
                    return Err(ConfigError::invalid(
                        "estimate",
                        "position lies outside the observation window",
                    ));
                }
                let pts = desired_points(
                    *est,
                    geometry.dtheta_max,
                    geometry.dr_max,
                    scheme.n_points(),
                    &geometry.window,
                )?;
                desired.push(point_covariance(cfg, alloc, &pts));
                eaves.extend(sample_points_sidelobe(cfg, *est, &geometry.window));
            }
            let wiretap = point_covariance(cfg, alloc, &eaves);
            Ok(SchemeCovariances { desired, wiretap })
        }
    }
}

/// Confidential beamformer `v` and artificial-noise vector `w`, both unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerPair {
    pub v: CVec,
    pub w: CVec,
    pub v_report: SolverReport,
    pub w_report: SolverReport,
}

impl BeamformerPair {
    /// Pair from given vectors (normalized), with empty solver reports.
    pub fn from_vectors(v: &CVec, w: &CVec) -> Self {
        Self {
            v: normalized(v),
            w: normalized(w),
            v_report: SolverReport::default(),
            w_report: SolverReport::default(),
        }
    }
}

fn solve_and_extract(
    problem: &MaxMinRatioProblem,
    settings: &SolverSettings,
    seed: u64,
) -> Result<(CVec, SolverReport), SolverError> {
    let (matrix, relaxed_value, trace, iterations): (CMat, f64, Vec<f64>, usize) =
        match settings.solver {
            SolverKind::Bisection => {
                let s = solve_maxmin_ratio(problem, settings)?;
                let value = problem.min_ratio(&s.matrix).max(s.value);
                (s.matrix, value, s.trace, s.iterations)
            }
            SolverKind::Sca => {
                let s = sca_solve(problem, settings, seed)?;
                (s.matrix, s.value, s.trace, s.iterations)
            }
        };
    let ext = rank_one_extract(&matrix, problem, settings.randomization_count, seed);
    let gap = if relaxed_value > 0.0 {
        ((relaxed_value - ext.min_ratio) / relaxed_value).max(0.0)
    } else {
        0.0
    };
    Ok((
        ext.vector,
        SolverReport {
            objective_trace: trace,
            relaxed_value,
            achieved_min_ratio: ext.min_ratio,
            relaxation_gap: gap,
            iterations,
            extraction: ext.method,
        },
    ))
}

/// Solves both ratio problems for precomputed covariances. The noise power in
/// `cfg` enters only here, so covariances can be shared across SNR values.
pub fn design_from_covariances(
    cfg: &ScenarioConfig,
    covs: &SchemeCovariances,
    settings: &SolverSettings,
    seed: u64,
) -> Result<BeamformerPair, SolverError> {
    let slnr = MaxMinRatioProblem::slnr(cfg, &covs.desired, &covs.wiretap)?;
    let anlnr = MaxMinRatioProblem::anlnr(cfg, &covs.desired, &covs.wiretap)?;
    let (v, v_report) = solve_and_extract(&slnr, settings, seed)?;
    let (w, w_report) = solve_and_extract(&anlnr, settings, seed.wrapping_add(1))?;
    Ok(BeamformerPair {
        v,
        w,
        v_report,
        w_report,
    })
}

/// Full pipeline: covariances for `scheme`, then both design problems.
pub fn design_beamformers(
    cfg: &ScenarioConfig,
    alloc: &SubcarrierAllocation,
    scheme: Scheme,
    geometry: &DesignGeometry,
    settings: &SolverSettings,
    seed: u64,
) -> Result<BeamformerPair, Error> {
    cfg.validate()?;
    let covs = build_covariances(cfg, alloc, scheme, geometry)?;
    Ok(design_from_covariances(cfg, &covs, settings, seed)?)
}
