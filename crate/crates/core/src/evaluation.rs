//! Link-level evaluation: secrecy rate, SINR surfaces, Monte Carlo sweeps,
//! and covariance operation counts.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{ConfigError, Error};
use crate::geometry::{
    draw_allocation, received_sinr, steering_vector, GroundPosition, ScenarioConfig, SteeringVector,
    SubcarrierAllocation,
};
use crate::optimizer::{
    build_covariances, design_from_covariances, BeamformerPair, DesignGeometry, Scheme,
    SolverSettings,
};
use crate::regions::{wiretap_nodes, Grid, QuadratureSpec, RegionRect};
use crate::seeding::{derive_seed, rng, Stream};

/// Shannon capacity `log2(1 + sinr)` in bits/s/Hz.
pub fn capacity(sinr: f64) -> f64 {
    sinr.ln_1p() / std::f64::consts::LN_2
}

/// `max(0, min_m C(user_m) - max_k C(eave_k))`; no eavesdroppers means a zero subtrahend.
pub fn secrecy_rate_from_sinr(user_sinr: &[f64], eavesdropper_sinr: &[f64]) -> f64 {
    let worst_user = user_sinr.iter().cloned().fold(f64::INFINITY, f64::min);
    let best_eave = eavesdropper_sinr.iter().cloned().fold(0.0, f64::max);
    (capacity(worst_user) - capacity(best_eave)).max(0.0)
}

/// Secrecy rate of `pair` for users and eavesdroppers at the given positions.
pub fn secrecy_rate(
    cfg: &ScenarioConfig,
    pair: &BeamformerPair,
    users: &[GroundPosition],
    eaves: &[GroundPosition],
    alloc: &SubcarrierAllocation,
) -> Result<f64, ConfigError> {
    if users.is_empty() {
        return Err(ConfigError::NoUsers);
    }
    let sinr = |p: &GroundPosition| received_sinr(cfg, &pair.v, &pair.w, &steering_vector(cfg, alloc, *p));
    let u: Vec<f64> = users.iter().map(sinr).collect();
    let e: Vec<f64> = eaves.iter().map(sinr).collect();
    Ok(secrecy_rate_from_sinr(&u, &e))
}

/// SINR sampled on a midpoint grid; `values` is row-major with angle outer.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrField {
    pub angles: Vec<f64>,
    pub ranges: Vec<f64>,
    pub values: Vec<f64>,
}

impl SinrField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GroundPosition, f64)> + '_ {
        let nr = self.ranges.len();
        self.values.iter().enumerate().map(move |(k, v)| {
            (GroundPosition::new(self.angles[k / nr], self.ranges[k % nr]), *v)
        })
    }

    /// Grid node with the largest SINR (first one on ties).
    pub fn peak(&self) -> Option<(GroundPosition, f64)> {
        self.iter()
            .fold(None, |best: Option<(GroundPosition, f64)>, (p, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((p, v)),
            })
    }

    /// Mean SINR over the nodes satisfying `keep`, or `None` if there are none.
    pub fn mean_where(&self, keep: impl Fn(GroundPosition) -> bool) -> Option<f64> {
        let (sum, count) = self
            .iter()
            .filter(|(p, _)| keep(*p))
            .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
        (count > 0).then(|| sum / count as f64)
    }
}

/// Received SINR with fixed `v`, `w` at every node of the `quad` grid over `window`.
pub fn sinr_surface(
    cfg: &ScenarioConfig,
    pair: &BeamformerPair,
    alloc: &SubcarrierAllocation,
    window: &RegionRect,
    quad: &QuadratureSpec,
) -> SinrField {
    let grid = Grid::new(window, quad);
    let values = grid
        .angles
        .par_iter()
        .flat_map_iter(|&a| {
            grid.ranges.iter().map(move |&r| {
                let h = steering_vector(cfg, alloc, GroundPosition::new(a, r));
                received_sinr(cfg, &pair.v, &pair.w, &h)
            })
        })
        .collect();
    SinrField {
        angles: grid.angles,
        ranges: grid.ranges,
        values,
    }
}

/// Zero-mean Gaussian position error truncated to `[-max, max]` per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModel {
    pub dtheta_max: f64,
    pub dr_max: f64,
    pub sigma_theta: f64,
    pub sigma_r: f64,
}

impl ErrorModel {
    pub fn new(dtheta_max: f64, dr_max: f64, sigma_theta: f64, sigma_r: f64) -> Result<Self, ConfigError> {
        for (name, v) in [
            ("dtheta_max", dtheta_max),
            ("dr_max", dr_max),
            ("sigma_theta", sigma_theta),
            ("sigma_r", sigma_r),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ConfigError::invalid(name, "must be finite and non-negative"));
            }
        }
        Ok(Self {
            dtheta_max,
            dr_max,
            sigma_theta,
            sigma_r,
        })
    }

    /// Standard deviations of one third of each bound.
    pub fn from_bounds(dtheta_max: f64, dr_max: f64) -> Result<Self, ConfigError> {
        Self::new(dtheta_max, dr_max, dtheta_max / 3.0, dr_max / 3.0)
    }

    /// No error at all.
    pub fn exact() -> Self {
        Self {
            dtheta_max: 0.0,
            dr_max: 0.0,
            sigma_theta: 0.0,
            sigma_r: 0.0,
        }
    }
}

fn truncated_normal(rng: &mut impl rand::Rng, sigma: f64, bound: f64) -> f64 {
    if sigma == 0.0 || bound == 0.0 {
        return 0.0;
    }
    let normal = Normal::new(0.0, sigma).expect("positive finite sigma");
    loop {
        let x: f64 = normal.sample(rng);
        if x.abs() <= bound {
            return x;
        }
    }
}

/// `(dtheta, dr)` for draw number `trial`; a pure function of `(seed, trial)`.
pub fn draw_error(model: &ErrorModel, seed: u64, trial: u64) -> (f64, f64) {
    let mut rng = rng(seed, Stream::PositionError, trial);
    let dtheta = truncated_normal(&mut rng, model.sigma_theta, model.dtheta_max);
    let dr = truncated_normal(&mut rng, model.sigma_r, model.dr_max);
    (dtheta, dr)
}

/// Seed of trial `trial` under a sweep seed; drives its allocation and randomization.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    derive_seed(seed, Stream::Trial, trial)
}

/// One evaluated trial at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub trial: usize,
    pub scheme: Scheme,
    pub snr_db: f64,
    pub estimates: Vec<GroundPosition>,
    pub true_positions: Vec<GroundPosition>,
    pub user_sinr: Vec<f64>,
    /// Largest SINR over the wiretap grid.
    pub eavesdropper_sinr: f64,
    /// Clamped at zero, bits/s/Hz.
    pub secrecy_rate: f64,
}

/// A trial whose design step failed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub trial: usize,
    pub scheme: Scheme,
    pub snr_db: f64,
    pub message: String,
}

/// Mean and sample standard deviation of the secrecy rate for one scheme and SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub scheme: Scheme,
    /// Successful trials.
    pub trials: usize,
    pub failures: usize,
    pub mean_sr: f64,
    pub std_sr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Scheme-major, then SNR in the requested order.
    pub rows: Vec<SweepRow>,
    /// Trial-major, then scheme, then SNR.
    pub records: Vec<ResultRecord>,
    pub failures: Vec<TrialFailure>,
}

/// Inputs of a Monte Carlo secrecy-rate sweep.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub geometry: DesignGeometry,
    pub settings: SolverSettings,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub error_model: ErrorModel,
    pub seed: u64,
    /// Use this allocation in every trial instead of drawing a fresh one.
    pub fixed_allocation: Option<SubcarrierAllocation>,
}

enum Outcome {
    Record(ResultRecord),
    Failure(TrialFailure),
}

fn run_trial(cfg: &ScenarioConfig, schemes: &[Scheme], spec: &SweepSpec, trial: usize) -> Result<Vec<Outcome>, Error> {
    let geometry = &spec.geometry;
    let tseed = trial_seed(spec.seed, trial as u64);
    let alloc = match &spec.fixed_allocation {
        Some(a) => a.clone(),
        None => draw_allocation(cfg, tseed)?,
    };
    let users = geometry.estimates.len();
    let true_positions: Vec<GroundPosition> = geometry
        .estimates
        .iter()
        .enumerate()
        .map(|(m, est)| {
            let (dt, dr) = draw_error(&spec.error_model, spec.seed, (trial * users + m) as u64);
            geometry
                .window
                .clamp(GroundPosition::new(est.angle + dt, est.range + dr))
        })
        .collect();

    let regions = geometry.desired_regions()?;
    let (eave_nodes, _) = wiretap_nodes(&geometry.window, &regions, &geometry.window_quad);
    let eave_h: Vec<SteeringVector> = eave_nodes.iter().map(|p| steering_vector(cfg, &alloc, *p)).collect();
    let user_h: Vec<SteeringVector> = true_positions.iter().map(|p| steering_vector(cfg, &alloc, *p)).collect();

    let mut out = Vec::with_capacity(schemes.len() * spec.snr_db.len());
    for &scheme in schemes {
        let covs = build_covariances(cfg, &alloc, scheme, geometry)?;
        for &snr_db in &spec.snr_db {
            let c = cfg.clone().with_snr_db(snr_db);
            match design_from_covariances(&c, &covs, &spec.settings, tseed) {
                Ok(pair) => {
                    let sinr = |h: &SteeringVector| received_sinr(&c, &pair.v, &pair.w, h);
                    let user_sinr: Vec<f64> = user_h.iter().map(sinr).collect();
                    let eavesdropper_sinr = eave_h.iter().map(sinr).fold(0.0, f64::max);
                    out.push(Outcome::Record(ResultRecord {
                        trial,
                        scheme,
                        snr_db,
                        estimates: geometry.estimates.clone(),
                        true_positions: true_positions.clone(),
                        secrecy_rate: secrecy_rate_from_sinr(&user_sinr, &[eavesdropper_sinr]),
                        user_sinr,
                        eavesdropper_sinr,
                    }));
                }
                Err(e) => out.push(Outcome::Failure(TrialFailure {
                    trial,
                    scheme,
                    snr_db,
                    message: e.to_string(),
                })),
            }
        }
    }
    Ok(out)
}

/// Monte Carlo secrecy rate for several schemes under common random numbers.
///
/// Each trial draws an allocation and per-user errors from `(seed, trial)`,
/// designs from the estimates, and evaluates the users at their true
/// positions against the worst eavesdropper on the wiretap grid (window
/// quadrature of `spec.geometry`). Trials run on the current rayon pool and
/// are reduced in trial order, so results do not depend on the thread count.
/// Configuration errors abort the sweep; solver failures are recorded.
pub fn monte_carlo(cfg: &ScenarioConfig, schemes: &[Scheme], spec: &SweepSpec) -> Result<SweepOutcome, Error> {
    cfg.validate()?;
    if spec.trials == 0 {
        return Err(ConfigError::invalid("trials", "at least one trial is required").into());
    }
    if spec.geometry.estimates.is_empty() {
        return Err(ConfigError::NoUsers.into());
    }
    let per_trial: Vec<Vec<Outcome>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, schemes, spec, t))
        .collect::<Result<_, _>>()?;

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for outcome in per_trial.into_iter().flatten() {
        match outcome {
            Outcome::Record(r) => records.push(r),
            Outcome::Failure(f) => failures.push(f),
        }
    }

    let mut rows = Vec::with_capacity(schemes.len() * spec.snr_db.len());
    for &scheme in schemes {
        for &snr_db in &spec.snr_db {
            let sr: Vec<f64> = records
                .iter()
                .filter(|r| r.scheme == scheme && r.snr_db == snr_db)
                .map(|r| r.secrecy_rate)
                .collect();
            let failed = failures
                .iter()
                .filter(|f| f.scheme == scheme && f.snr_db == snr_db)
                .count();
            let (mean_sr, std_sr) = mean_std(&sr);
            rows.push(SweepRow {
                snr_db,
                scheme,
                trials: sr.len(),
                failures: failed,
                mean_sr,
                std_sr,
            });
        }
    }
    Ok(SweepOutcome {
        rows,
        records,
        failures,
    })
}

/// Single-scheme sweep: one row per SNR.
pub fn monte_carlo_sr(cfg: &ScenarioConfig, scheme: Scheme, spec: &SweepSpec) -> Result<Vec<SweepRow>, Error> {
    Ok(monte_carlo(cfg, &[scheme], spec)?.rows)
}

/// Mean and sample (n - 1) standard deviation; `NaN` mean for an empty slice.
fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Covariance-construction work of a scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct OpCountReport {
    pub scheme: Scheme,
    /// `N_p` for the regional scheme, desired sample points for the others.
    pub integration_points: usize,
    /// `integration_points * (2 N_T - 1)` complex multiply-adds.
    pub covariance_ops: u64,
    /// Outer iterations of the beamformer and AN solves, when a design is attached.
    pub solver_iterations: Option<(usize, usize)>,
}

impl OpCountReport {
    pub fn with_design(mut self, pair: &BeamformerPair) -> Self {
        self.solver_iterations = Some((pair.v_report.iterations, pair.w_report.iterations));
        self
    }
}

/// Operation counts for `scheme` with `quad` covering the observation window.
/// The point-scheme counts ignore `quad`.
pub fn op_count_report(
    cfg: &ScenarioConfig,
    scheme: Scheme,
    geometry: &DesignGeometry,
    quad: &QuadratureSpec,
) -> OpCountReport {
    let integration_points = match scheme {
        Scheme::Regional => quad.node_count(&geometry.window),
        other => other.n_points() * geometry.estimates.len(),
    };
    OpCountReport {
        scheme,
        integration_points,
        covariance_ops: integration_points as u64 * (2 * cfg.n_antennas as u64 - 1),
        solver_iterations: None,
    }
}
