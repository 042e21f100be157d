//! Scenario parameters and the FDA steering model toward ground positions.
//!
//! Positions are given in the ground-plane polar frame centred under the
//! reference (first) array element. The UAV hovers at height `d_h`, so the
//! array sees each receiver at an effective slant range and angle.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::error::ConfigError;
use crate::linalg::{CVec, quad_form, outer};
use crate::seeding::{self, Stream};
use crate::SPEED_OF_LIGHT;

/// Array, carrier, power, and noise parameters of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_antennas: usize,
    /// Element spacing in meters.
    pub element_spacing: f64,
    pub carrier_freq: f64,
    pub n_subcarriers: usize,
    /// Total signal bandwidth `B = N * delta_f` in Hz.
    pub bandwidth: f64,
    pub uav_height: f64,
    pub total_power: f64,
    /// Confidential-signal power fraction.
    pub alpha1: f64,
    /// Artificial-noise power fraction.
    pub alpha2: f64,
    pub noise_power: f64,
}

impl ScenarioConfig {
    pub const DEFAULT_UAV_HEIGHT: f64 = 100.0;

    /// Reference setting: 16 antennas, 3 GHz carrier, 5 MHz over 1024
    /// subcarriers, 1 W split evenly, 15 dB transmit SNR, half-wavelength
    /// spacing, 100 m UAV height.
    pub fn reference() -> Self {
        let carrier_freq = 3.0e9;
        Self {
            n_antennas: 16,
            element_spacing: SPEED_OF_LIGHT / carrier_freq / 2.0,
            carrier_freq,
            n_subcarriers: 1024,
            bandwidth: 5.0e6,
            uav_height: Self::DEFAULT_UAV_HEIGHT,
            total_power: 1.0,
            alpha1: 0.5,
            alpha2: 0.5,
            noise_power: 1.0 / 10f64.powf(1.5),
        }
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.bandwidth / self.n_subcarriers as f64
    }

    /// Sets the noise power from a transmit-referenced SNR `P / sigma^2` in dB.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.noise_power = self.total_power / 10f64.powf(snr_db / 10.0);
        self
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.total_power / self.noise_power).log10()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(name: &str, x: f64) -> Result<(), ConfigError> {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(name, format!("must be positive and finite, got {x}")))
            }
        }
        if self.n_antennas == 0 {
            return Err(ConfigError::invalid("n_antennas", "must be at least 1"));
        }
        if self.n_subcarriers == 0 {
            return Err(ConfigError::invalid("n_subcarriers", "must be at least 1"));
        }
        positive("element_spacing", self.element_spacing)?;
        positive("carrier_freq", self.carrier_freq)?;
        positive("bandwidth", self.bandwidth)?;
        positive("total_power", self.total_power)?;
        positive("noise_power", self.noise_power)?;
        if !(self.uav_height.is_finite() && self.uav_height >= 0.0) {
            return Err(ConfigError::invalid("uav_height", "must be finite and non-negative"));
        }
        for (name, a) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(a > 0.0 && a < 1.0) {
                return Err(ConfigError::invalid(name, format!("must lie in (0, 1), got {a}")));
            }
        }
        if (self.alpha1 + self.alpha2 - 1.0).abs() > 1e-9 {
            return Err(ConfigError::invalid(
                "alpha1 + alpha2",
                format!("power fractions must sum to 1, got {}", self.alpha1 + self.alpha2),
            ));
        }
        Ok(())
    }
}

/// Ground position `(theta, r)`: angle in radians, range in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundPosition {
    pub angle: f64,
    pub range: f64,
}

impl GroundPosition {
    pub fn new(angle: f64, range: f64) -> Self {
        Self { angle, range }
    }

    pub fn from_degrees(angle_deg: f64, range: f64) -> Self {
        Self::new(angle_deg.to_radians(), range)
    }

    pub fn angle_deg(&self) -> f64 {
        self.angle.to_degrees()
    }
}

/// Subcarrier index `k_n` assigned to each element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcarrierAllocation {
    indices: Vec<usize>,
}

impl SubcarrierAllocation {
    pub fn new(indices: Vec<usize>, n_subcarriers: usize) -> Result<Self, ConfigError> {
        let mut seen = indices.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(ConfigError::invalid("allocation", "subcarrier indices must be distinct"));
        }
        if let Some(&k) = seen.last() {
            if k >= n_subcarriers {
                return Err(ConfigError::invalid(
                    "allocation",
                    format!("index {k} outside [0, {n_subcarriers})"),
                ));
            }
        }
        Ok(Self { indices })
    }

    /// All elements on the carrier itself, the plain phased-array special case.
    /// Not a valid FDA allocation for more than one element; used in tests.
    pub fn all_zero(n_antennas: usize) -> Self {
        Self { indices: vec![0; n_antennas] }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Unit-norm FDA steering vector `h(theta, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(CVec);

impl SteeringVector {
    pub fn as_vector(&self) -> &CVec {
        &self.0
    }

    pub fn into_vector(self) -> CVec {
        self.0
    }
}

/// Slant range and angle seen from the reference element: `r' = sqrt(r^2 + d_h^2)`,
/// `theta' = acos(r cos(theta) / r')`.
pub fn effective_geometry(pos: GroundPosition, uav_height: f64) -> (f64, f64) {
    let eff_range = pos.range.hypot(uav_height);
    if eff_range == 0.0 {
        return (FRAC_PI_2, 0.0);
    }
    let cos_eff = (pos.range / eff_range * pos.angle.cos()).clamp(-1.0, 1.0);
    (cos_eff.acos(), eff_range)
}

/// Distance from element `index` (0-based; 0 is the reference) to the receiver.
pub fn element_range(eff_range: f64, eff_angle: f64, index: usize, spacing: f64) -> f64 {
    eff_range - index as f64 * spacing * eff_angle.cos()
}

/// Slant range and `cos(theta')`, computed without the acos round trip.
fn slant(pos: GroundPosition, uav_height: f64) -> (f64, f64) {
    let eff_range = pos.range.hypot(uav_height);
    let cos_eff = if eff_range == 0.0 {
        0.0
    } else {
        pos.range * pos.angle.cos() / eff_range
    };
    (eff_range, cos_eff)
}

/// Unreduced phase of element `index` relative to the reference phase.
///
/// `2 pi (f_c + k delta_f) r'_n / c - 2 pi f_c r' / c`, rearranged so the
/// large carrier terms cancel analytically.
fn raw_phase(cfg: &ScenarioConfig, k: usize, eff_range: f64, cos_eff: f64, index: usize) -> f64 {
    let offset = index as f64 * cfg.element_spacing * cos_eff;
    let sub = k as f64 * cfg.subcarrier_spacing();
    TAU * (sub * (eff_range - offset) - cfg.carrier_freq * offset) / SPEED_OF_LIGHT
}

/// Phase shift `psi_n(theta, r)` of element `index`, reduced into `[0, 2 pi)`.
pub fn phase_shift(
    cfg: &ScenarioConfig,
    alloc: &SubcarrierAllocation,
    pos: GroundPosition,
    index: usize,
) -> f64 {
    let (eff_range, cos_eff) = slant(pos, cfg.uav_height);
    let psi = raw_phase(cfg, alloc.indices[index], eff_range, cos_eff, index);
    let reduced = psi.rem_euclid(TAU);
    if reduced >= TAU {
        0.0
    } else {
        reduced
    }
}

/// Normalized steering vector with entries `exp(j psi_n) / sqrt(N_T)`.
pub fn steering_vector(
    cfg: &ScenarioConfig,
    alloc: &SubcarrierAllocation,
    pos: GroundPosition,
) -> SteeringVector {
    let (eff_range, cos_eff) = slant(pos, cfg.uav_height);
    let scale = 1.0 / (alloc.len() as f64).sqrt();
    let entries = CVec::from_iterator(
        alloc.len(),
        alloc.indices.iter().enumerate().map(|(n, &k)| {
            let psi = raw_phase(cfg, k, eff_range, cos_eff, n);
            Complex64::from_polar(scale, psi)
        }),
    );
    SteeringVector(entries)
}

/// Draws `N_T` distinct subcarrier indices uniformly without replacement.
pub fn draw_allocation(cfg: &ScenarioConfig, seed: u64) -> Result<SubcarrierAllocation, ConfigError> {
    if cfg.n_subcarriers < cfg.n_antennas {
        return Err(ConfigError::NotEnoughSubcarriers {
            needed: cfg.n_antennas,
            available: cfg.n_subcarriers,
        });
    }
    let mut rng = seeding::rng(seed, Stream::Allocation, 0);
    let indices = rand::seq::index::sample(&mut rng, cfg.n_subcarriers, cfg.n_antennas).into_vec();
    Ok(SubcarrierAllocation { indices })
}

/// Received SINR `alpha1 P |h^H v|^2 / (alpha2 P |h^H w|^2 + sigma^2)`.
pub fn received_sinr(cfg: &ScenarioConfig, v: &CVec, w: &CVec, h: &SteeringVector) -> f64 {
    sinr_from_gains(cfg, h.0.dotc(v).norm_sqr(), h.0.dotc(w).norm_sqr())
}

pub(crate) fn sinr_from_gains(cfg: &ScenarioConfig, signal_gain: f64, noise_gain: f64) -> f64 {
    cfg.alpha1 * cfg.total_power * signal_gain
        / (cfg.alpha2 * cfg.total_power * noise_gain + cfg.noise_power)
}

/// `|h^H v|^2` written as a quadratic form, for tests that want a second route.
pub fn beam_gain(h: &SteeringVector, v: &CVec) -> f64 {
    quad_form(&outer(&h.0), v)
}
