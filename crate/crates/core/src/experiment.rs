//! Experiment configuration, CSV artifacts, and the oracle suite.
//!
//! Configuration files are plain `key = value` lines; `#` starts a comment.
//! Angles are given in degrees and converted to radians when the module-level
//! types are built. Every key has a reference-scenario default, so a file only needs the
//! keys it changes. [`ExperimentConfig::to_config_string`] prints a complete
//! file that parses back to the same configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ConfigError, Error};
use crate::evaluation::{monte_carlo, secrecy_rate, sinr_surface, ErrorModel, SweepOutcome, SweepSpec};
use crate::geometry::{draw_allocation, received_sinr, steering_vector, GroundPosition, ScenarioConfig};
use crate::linalg::{generalized_lambda_max, hermitian_eigen, normalized, trace_re, CMat, CVec};
use crate::optimizer::{
    build_covariances, design_beamformers, sca_solve, solve_maxmin_ratio, BeamformerPair, DesignGeometry,
    MaxMinRatioProblem, Scheme, SolverKind, SolverSettings,
};
use crate::regions::{QuadratureSpec, RegionRect};
use crate::SPEED_OF_LIGHT;

/// Every setting of one experiment, in boundary units (degrees, meters, Hz).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_antennas: usize,
    /// `None` means half a wavelength at the carrier.
    pub element_spacing_m: Option<f64>,
    pub carrier_freq_hz: f64,
    pub n_subcarriers: usize,
    pub bandwidth_hz: f64,
    pub uav_height_m: f64,
    pub total_power_w: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// SNR used by `surface` and `design`.
    pub snr_db: f64,
    /// Estimated user positions as `(angle_deg, range_m)`.
    pub users: Vec<(f64, f64)>,
    pub dtheta_max_deg: f64,
    pub dr_max_m: f64,
    pub theta_max_deg: f64,
    pub r_max_m: f64,
    pub region_step_deg: f64,
    pub region_step_m: f64,
    pub window_step_deg: f64,
    pub window_step_m: f64,
    pub surface_step_deg: f64,
    pub surface_step_m: f64,
    /// Scheme for `surface` and `design`.
    pub scheme: Scheme,
    pub sweep_schemes: Vec<Scheme>,
    pub snr_list_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub solver: SolverKind,
    pub randomization_count: usize,
    pub max_outer_iters: usize,
}

const KEYS: &[&str] = &[
    "n_antennas",
    "element_spacing_m",
    "carrier_freq_hz",
    "n_subcarriers",
    "bandwidth_hz",
    "uav_height_m",
    "total_power_w",
    "alpha1",
    "alpha2",
    "snr_db",
    "users",
    "dtheta_max_deg",
    "dr_max_m",
    "theta_max_deg",
    "r_max_m",
    "region_step_deg",
    "region_step_m",
    "window_step_deg",
    "window_step_m",
    "surface_step_deg",
    "surface_step_m",
    "scheme",
    "points",
    "sweep_schemes",
    "snr_list_db",
    "trials",
    "seed",
    "out",
    "solver",
    "randomization_count",
    "max_outer_iters",
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::reference()
    }
}

impl ExperimentConfig {
    /// The reference preset.
    pub fn reference() -> Self {
        Self {
            n_antennas: 16,
            element_spacing_m: None,
            carrier_freq_hz: 3.0e9,
            n_subcarriers: 1024,
            bandwidth_hz: 5.0e6,
            uav_height_m: ScenarioConfig::DEFAULT_UAV_HEIGHT,
            total_power_w: 1.0,
            alpha1: 0.5,
            alpha2: 0.5,
            snr_db: 15.0,
            users: vec![(45.0, 300.0), (120.0, 600.0)],
            dtheta_max_deg: 6.0,
            dr_max_m: 50.0,
            theta_max_deg: 180.0,
            r_max_m: 1000.0,
            region_step_deg: QuadratureSpec::DESIRED_DEFAULT_DEG_M.0,
            region_step_m: QuadratureSpec::DESIRED_DEFAULT_DEG_M.1,
            window_step_deg: QuadratureSpec::WINDOW_DEFAULT_DEG_M.0,
            window_step_m: QuadratureSpec::WINDOW_DEFAULT_DEG_M.1,
            surface_step_deg: 1.0,
            surface_step_m: 10.0,
            scheme: Scheme::Regional,
            sweep_schemes: vec![
                Scheme::Regional,
                Scheme::Point(4),
                Scheme::Point(16),
                Scheme::Point(64),
                Scheme::NonRobust,
            ],
            snr_list_db: vec![0.0, 3.0, 6.0, 9.0, 12.0, 15.0],
            trials: 200,
            seed: 0,
            out_dir: PathBuf::from("results"),
            solver: SolverKind::Bisection,
            randomization_count: 1000,
            max_outer_iters: SolverSettings::default().max_outer_iters,
        }
    }

    /// Preset with the lines of `text` applied on top.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::reference();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Reads and parses a configuration file.
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::parse(&text)?)
    }

    /// Applies `key = value` lines; later lines override earlier ones.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                reason: format!("expected `key = value`, found `{line}`"),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            reason: format!("override `{assignment}` is not of the form key=value"),
        })?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "n_antennas" => self.n_antennas = parse_num(key, value)?,
            "element_spacing_m" => {
                self.element_spacing_m = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "carrier_freq_hz" => self.carrier_freq_hz = parse_num(key, value)?,
            "n_subcarriers" => self.n_subcarriers = parse_num(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = parse_num(key, value)?,
            "uav_height_m" => self.uav_height_m = parse_num(key, value)?,
            "total_power_w" => self.total_power_w = parse_num(key, value)?,
            "alpha1" => self.alpha1 = parse_num(key, value)?,
            "alpha2" => self.alpha2 = parse_num(key, value)?,
            "snr_db" => self.snr_db = parse_num(key, value)?,
            "users" => self.users = parse_users(value)?,
            "dtheta_max_deg" => self.dtheta_max_deg = parse_num(key, value)?,
            "dr_max_m" => self.dr_max_m = parse_num(key, value)?,
            "theta_max_deg" => self.theta_max_deg = parse_num(key, value)?,
            "r_max_m" => self.r_max_m = parse_num(key, value)?,
            "region_step_deg" => self.region_step_deg = parse_num(key, value)?,
            "region_step_m" => self.region_step_m = parse_num(key, value)?,
            "window_step_deg" => self.window_step_deg = parse_num(key, value)?,
            "window_step_m" => self.window_step_m = parse_num(key, value)?,
            "surface_step_deg" => self.surface_step_deg = parse_num(key, value)?,
            "surface_step_m" => self.surface_step_m = parse_num(key, value)?,
            "scheme" => self.scheme = value.parse()?,
            "points" => {
                let n: usize = parse_num(key, value)?;
                if n == 0 {
                    return Err(ConfigError::invalid("points", "must be at least 1"));
                }
                if let Scheme::Point(_) = self.scheme {
                    self.scheme = Scheme::Point(n);
                }
            }
            "sweep_schemes" => {
                self.sweep_schemes = split_list(value).map(str::parse).collect::<Result<_, _>>()?
            }
            "snr_list_db" => {
                self.snr_list_db = split_list(value)
                    .map(|v| parse_num(key, v))
                    .collect::<Result<_, _>>()?
            }
            "trials" => self.trials = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "solver" => {
                self.solver = match value.to_ascii_lowercase().as_str() {
                    "bisection" => SolverKind::Bisection,
                    "sca" => SolverKind::Sca,
                    other => {
                        return Err(ConfigError::invalid("solver", format!("expected bisection or sca, got `{other}`")))
                    }
                }
            }
            "randomization_count" => self.randomization_count = parse_num(key, value)?,
            "max_outer_iters" => self.max_outer_iters = parse_num(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Complete configuration file text, one key per line.
    pub fn to_config_string(&self) -> String {
        let list = |xs: &[f64]| xs.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("n_antennas", self.n_antennas.to_string());
        put(
            "element_spacing_m",
            self.element_spacing_m.map_or_else(|| "auto".to_string(), |d| d.to_string()),
        );
        put("carrier_freq_hz", self.carrier_freq_hz.to_string());
        put("n_subcarriers", self.n_subcarriers.to_string());
        put("bandwidth_hz", self.bandwidth_hz.to_string());
        put("uav_height_m", self.uav_height_m.to_string());
        put("total_power_w", self.total_power_w.to_string());
        put("alpha1", self.alpha1.to_string());
        put("alpha2", self.alpha2.to_string());
        put("snr_db", self.snr_db.to_string());
        put(
            "users",
            self.users
                .iter()
                .map(|(a, r)| format!("{a}:{r}"))
                .collect::<Vec<_>>()
                .join(", "),
        );
        put("dtheta_max_deg", self.dtheta_max_deg.to_string());
        put("dr_max_m", self.dr_max_m.to_string());
        put("theta_max_deg", self.theta_max_deg.to_string());
        put("r_max_m", self.r_max_m.to_string());
        put("region_step_deg", self.region_step_deg.to_string());
        put("region_step_m", self.region_step_m.to_string());
        put("window_step_deg", self.window_step_deg.to_string());
        put("window_step_m", self.window_step_m.to_string());
        put("surface_step_deg", self.surface_step_deg.to_string());
        put("surface_step_m", self.surface_step_m.to_string());
        put("scheme", self.scheme.to_string());
        put(
            "sweep_schemes",
            self.sweep_schemes.iter().map(Scheme::to_string).collect::<Vec<_>>().join(", "),
        );
        put("snr_list_db", list(&self.snr_list_db));
        put("trials", self.trials.to_string());
        put("seed", self.seed.to_string());
        put("out", self.out_dir.display().to_string());
        put(
            "solver",
            match self.solver {
                SolverKind::Bisection => "bisection",
                SolverKind::Sca => "sca",
            }
            .to_string(),
        );
        put("randomization_count", self.randomization_count.to_string());
        put("max_outer_iters", self.max_outer_iters.to_string());
        s
    }

    /// Scenario at `snr_db`.
    pub fn scenario(&self) -> ScenarioConfig {
        ScenarioConfig {
            n_antennas: self.n_antennas,
            element_spacing: self
                .element_spacing_m
                .unwrap_or(SPEED_OF_LIGHT / self.carrier_freq_hz / 2.0),
            carrier_freq: self.carrier_freq_hz,
            n_subcarriers: self.n_subcarriers,
            bandwidth: self.bandwidth_hz,
            uav_height: self.uav_height_m,
            total_power: self.total_power_w,
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            noise_power: 1.0,
        }
        .with_snr_db(self.snr_db)
    }

    pub fn window(&self) -> Result<RegionRect, ConfigError> {
        RegionRect::window(self.theta_max_deg.to_radians(), self.r_max_m)
    }

    pub fn geometry(&self) -> Result<DesignGeometry, ConfigError> {
        if self.users.is_empty() {
            return Err(ConfigError::NoUsers);
        }
        for (name, x) in [("dtheta_max_deg", self.dtheta_max_deg), ("dr_max_m", self.dr_max_m)] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(ConfigError::invalid(name, "must be finite and non-negative"));
            }
        }
        Ok(DesignGeometry {
            estimates: self
                .users
                .iter()
                .map(|&(a, r)| GroundPosition::from_degrees(a, r))
                .collect(),
            dtheta_max: self.dtheta_max_deg.to_radians(),
            dr_max: self.dr_max_m,
            window: self.window()?,
            region_quad: QuadratureSpec::from_degrees(self.region_step_deg, self.region_step_m)?,
            window_quad: QuadratureSpec::from_degrees(self.window_step_deg, self.window_step_m)?,
        })
    }

    pub fn surface_quad(&self) -> Result<QuadratureSpec, ConfigError> {
        QuadratureSpec::from_degrees(self.surface_step_deg, self.surface_step_m)
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            solver: self.solver,
            randomization_count: self.randomization_count,
            max_outer_iters: self.max_outer_iters,
            ..SolverSettings::default()
        }
    }

    pub fn error_model(&self) -> Result<ErrorModel, ConfigError> {
        ErrorModel::from_bounds(self.dtheta_max_deg.to_radians(), self.dr_max_m)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        Ok(SweepSpec {
            geometry: self.geometry()?,
            settings: self.solver_settings(),
            snr_db: self.snr_list_db.clone(),
            trials: self.trials,
            error_model: self.error_model()?,
            seed: self.seed,
            fixed_allocation: None,
        })
    }

    /// Checks everything that can be checked without running a design.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scenario().validate()?;
        let geometry = self.geometry()?;
        geometry.desired_regions()?;
        for est in &geometry.estimates {
            if !geometry.window.contains(*est) {
                return Err(ConfigError::invalid("users", "estimate lies outside the observation window"));
            }
        }
        self.surface_quad()?;
        self.error_model()?;
        if self.n_subcarriers < self.n_antennas {
            return Err(ConfigError::NotEnoughSubcarriers {
                needed: self.n_antennas,
                available: self.n_subcarriers,
            });
        }
        if self.trials == 0 {
            return Err(ConfigError::invalid("trials", "at least one trial is required"));
        }
        if self.snr_list_db.is_empty() || self.snr_list_db.iter().any(|s| !s.is_finite()) {
            return Err(ConfigError::invalid("snr_list_db", "needs at least one finite value"));
        }
        if self.sweep_schemes.is_empty() {
            return Err(ConfigError::invalid("sweep_schemes", "needs at least one scheme"));
        }
        if !self.snr_db.is_finite() {
            return Err(ConfigError::invalid("snr_db", "must be finite"));
        }
        if self.max_outer_iters == 0 {
            return Err(ConfigError::invalid("max_outer_iters", "must be at least 1"));
        }
        if self.randomization_count == 0 {
            return Err(ConfigError::invalid("randomization_count", "must be at least 1"));
        }
        Ok(())
    }
}

/// Names of all recognized configuration keys.
pub fn config_keys() -> &'static [&'static str] {
    KEYS
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .trim()
        .parse()
        .map_err(|_| ConfigError::invalid(key, format!("cannot parse `{value}`")))
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// `angle_deg:range_m` pairs separated by commas; an empty value means no users.
fn parse_users(value: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
    split_list(value)
        .map(|pair| {
            let (a, r) = pair
                .split_once(':')
                .ok_or_else(|| ConfigError::invalid("users", format!("expected angle_deg:range_m, got `{pair}`")))?;
            Ok((parse_num("users", a)?, parse_num("users", r)?))
        })
        .collect()
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_error(&path))?;
    Ok(path)
}

/// Designed pair plus the file it was written to.
#[derive(Debug, Clone)]
pub struct DesignArtifact {
    pub path: PathBuf,
    pub pair: BeamformerPair,
}

fn design(config: &ExperimentConfig) -> Result<BeamformerPair, Error> {
    config.validate()?;
    let cfg = config.scenario();
    let alloc = draw_allocation(&cfg, config.seed)?;
    design_beamformers(
        &cfg,
        &alloc,
        config.scheme,
        &config.geometry()?,
        &config.solver_settings(),
        config.seed,
    )
}

/// Designs `v` and `w` and writes `design.csv` (`vector,element,re,im`).
pub fn run_design(config: &ExperimentConfig) -> Result<DesignArtifact, Error> {
    let pair = design(config)?;
    let mut csv = String::from("vector,element,re,im\n");
    for (name, vec) in [("v", &pair.v), ("w", &pair.w)] {
        for (i, z) in vec.iter().enumerate() {
            let _ = writeln!(csv, "{name},{i},{:.12},{:.12}", z.re, z.im);
        }
    }
    let path = write_artifact(&config.out_dir, "design.csv", &csv)?;
    Ok(DesignArtifact { path, pair })
}

#[derive(Debug, Clone)]
pub struct SurfaceArtifact {
    pub path: PathBuf,
    pub rows: usize,
    pub pair: BeamformerPair,
}

/// Designs for `config.scheme` and writes the SINR over the window to
/// `surface.csv`, angle-major, values in dB.
pub fn run_surface(config: &ExperimentConfig) -> Result<SurfaceArtifact, Error> {
    let pair = design(config)?;
    let cfg = config.scenario();
    let alloc = draw_allocation(&cfg, config.seed)?;
    let field = sinr_surface(&cfg, &pair, &alloc, &config.window()?, &config.surface_quad()?);
    let mut csv = String::with_capacity(32 * (field.len() + 1));
    csv.push_str("theta_deg,range_m,sinr_db\n");
    for (pos, sinr) in field.iter() {
        let _ = writeln!(csv, "{:.6},{:.6},{:.6}", pos.angle_deg(), pos.range, 10.0 * sinr.log10());
    }
    let path = write_artifact(&config.out_dir, "surface.csv", &csv)?;
    Ok(SurfaceArtifact {
        path,
        rows: field.len(),
        pair,
    })
}

#[derive(Debug, Clone)]
pub struct SweepArtifact {
    pub path: PathBuf,
    pub outcome: SweepOutcome,
}

/// Monte Carlo secrecy rate for every scheme in `config.sweep_schemes` over
/// `config.snr_list_db`, written to `sweep.csv`. `trials` counts the
/// trials that produced a design.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepArtifact, Error> {
    config.validate()?;
    let outcome = monte_carlo(&config.scenario(), &config.sweep_schemes, &config.sweep_spec()?)?;
    let path = write_artifact(&config.out_dir, "sweep.csv", &sweep_csv(&outcome))?;
    Ok(SweepArtifact { path, outcome })
}

pub fn sweep_csv(outcome: &SweepOutcome) -> String {
    let mut csv = String::from("snr_db,scheme,n_points,trials,mean_sr,std_sr\n");
    for row in &outcome.rows {
        let _ = writeln!(
            csv,
            "{:.6},{},{},{},{:.6},{:.6}",
            row.snr_db,
            row.scheme.name(),
            row.scheme.n_points(),
            row.trials,
            row.mean_sr,
            row.std_sr
        );
    }
    csv
}

/// One oracle comparison: passes when `measured <= tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    fn new(name: &str, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(OracleCheck::passed)
    }

    /// One line per check: status, name, measured value, tolerance.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {:<34} measured={:.3e} tolerance={:.1e}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance
            );
        }
        s
    }
}

/// Test hooks that corrupt an intermediate result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FaultInjection {
    /// Negate the first desired covariance before it is checked and used.
    pub covariance_sign_error: bool,
}

fn random_pd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    &g * g.adjoint() + CMat::identity(n, n) * Complex64::from(shift)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Runs the derived-value oracles at the configured scenario.
pub fn run_oracle_suite(config: &ExperimentConfig) -> Result<OracleReport, Error> {
    run_oracle_suite_with(config, FaultInjection::default())
}

pub fn run_oracle_suite_with(config: &ExperimentConfig, fault: FaultInjection) -> Result<OracleReport, Error> {
    config.validate()?;
    let cfg = config.scenario();
    let n = cfg.n_antennas;
    let settings = config.solver_settings();
    let geometry = config.geometry()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = Vec::new();

    // Single-term problems against a Cholesky-reduced eigendecomposition.
    let (mut bis_err, mut sca_err) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let a = random_pd(&mut rng, n, 0.0);
        let b = random_pd(&mut rng, n, 0.1);
        let (oracle, _) = generalized_lambda_max(&a, &b).expect("positive definite");
        let p = MaxMinRatioProblem::new(vec![a], vec![b])?;
        bis_err = bis_err.max(rel(solve_maxmin_ratio(&p, &settings)?.value, oracle));
        sca_err = sca_err.max(rel(sca_solve(&p, &settings, config.seed)?.value, oracle));
    }
    checks.push(OracleCheck::new("generalized-eigen (bisection)", bis_err, 1e-6));
    checks.push(OracleCheck::new("generalized-eigen (sca)", sca_err, 1e-6));

    // Covariance invariants at the configured geometry.
    let alloc = draw_allocation(&cfg, config.seed)?;
    let mut covs = build_covariances(&cfg, &alloc, Scheme::Regional, &geometry)?;
    if fault.covariance_sign_error {
        covs.desired[0].entries *= Complex64::from(-1.0);
    }
    let all = || covs.desired.iter().chain(std::iter::once(&covs.wiretap));
    let (mut herm, mut psd, mut diag) = (0.0f64, 0.0f64, 0.0f64);
    for c in all() {
        let m = &c.entries;
        herm = herm.max(max_abs(&(m - m.adjoint())));
        let tr = trace_re(m).abs().max(f64::MIN_POSITIVE);
        psd = psd.max((-hermitian_eigen(m).bottom() / tr).max(0.0));
        let expect = c.measure / n as f64;
        for i in 0..n {
            diag = diag.max((m[(i, i)] - Complex64::from(expect)).norm() / expect);
        }
    }
    checks.push(OracleCheck::new("covariance hermitian", herm, 1e-12));
    checks.push(OracleCheck::new("covariance psd (-min eig / trace)", psd, 1e-9));
    checks.push(OracleCheck::new("covariance diagonal = measure/N_T", diag, 1e-9));

    // Halving both quadrature steps.
    let mut fine = geometry.clone();
    fine.region_quad = fine.region_quad.halved();
    fine.window_quad = fine.window_quad.halved();
    let fine_covs = build_covariances(&cfg, &alloc, Scheme::Regional, &fine)?;
    let mut refine = 0.0f64;
    for (c, f) in all().zip(fine_covs.desired.iter().chain(std::iter::once(&fine_covs.wiretap))) {
        let scale = max_abs(&f.entries);
        refine = refine.max(max_abs(&(&c.entries - &f.entries)) / scale);
    }
    checks.push(OracleCheck::new("quadrature refinement", refine, 1e-3));

    // Both solvers on the regional SLNR problem.
    let cross = match MaxMinRatioProblem::slnr(&cfg, &covs.desired, &covs.wiretap) {
        Ok(p) => {
            let b = solve_maxmin_ratio(&p, &settings)?;
            let s = sca_solve(&p, &settings, config.seed)?;
            rel(s.value, b.value)
        }
        Err(_) => f64::INFINITY,
    };
    checks.push(OracleCheck::new("sca vs bisection (regional slnr)", cross, 1e-4));

    // Rate and SINR formulas recomputed from scalars.
    let v = normalized(&random_vec(&mut rng, n));
    let w = normalized(&random_vec(&mut rng, n));
    let pair = BeamformerPair::from_vectors(&v, &w);
    let users = geometry.estimates.clone();
    let eaves = [GroundPosition::from_degrees(90.0, 800.0), GroundPosition::from_degrees(10.0, 150.0)];
    let scalar_sinr = |p: GroundPosition| {
        let h = steering_vector(&cfg, &alloc, p);
        let (mut sv, mut sw) = (Complex64::from(0.0), Complex64::from(0.0));
        for i in 0..n {
            sv += h.as_vector()[i].conj() * pair.v[i];
            sw += h.as_vector()[i].conj() * pair.w[i];
        }
        cfg.alpha1 * cfg.total_power * sv.norm_sqr()
            / (cfg.alpha2 * cfg.total_power * sw.norm_sqr() + cfg.noise_power)
    };
    let mut sinr_err = 0.0f64;
    for &p in users.iter().chain(eaves.iter()) {
        let h = steering_vector(&cfg, &alloc, p);
        sinr_err = sinr_err.max(rel(received_sinr(&cfg, &pair.v, &pair.w, &h), scalar_sinr(p)));
    }
    checks.push(OracleCheck::new("sinr duplicate evaluation", sinr_err, 1e-12));
    let best_eave = eaves.iter().map(|&p| scalar_sinr(p)).fold(0.0, f64::max);
    let worst_user = users.iter().map(|&p| scalar_sinr(p)).fold(f64::INFINITY, f64::min);
    let expected_sr = ((1.0 + worst_user).log2() - (1.0 + best_eave).log2()).max(0.0);
    let sr = secrecy_rate(&cfg, &pair, &users, &eaves, &alloc)?;
    checks.push(OracleCheck::new("secrecy rate duplicate evaluation", (sr - expected_sr).abs(), 1e-12));

    Ok(OracleReport { checks })
}
