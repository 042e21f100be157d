//! Regional-robust secure precise wireless transmission.
//!
//! A UAV carries a linear frequency-diverse array whose elements radiate on
//! randomly selected OFDM subcarriers, so the confidential beam can be focused
//! in both angle and range. Given only the estimated user positions and a
//! bound on the estimation error, this crate designs a confidential
//! beamformer `v` and an artificial-noise vector `w` that protect the whole
//! error rectangle around each user, and evaluates the resulting SINR fields
//! and secrecy rates.
//!
//! Module map:
//!
//! - [`geometry`]: scenario parameters, effective geometry, FDA steering vectors.
//! - [`regions`]: desired/wiretap regions, sample points, leakage covariances.
//! - [`optimizer`]: max-min ratio solvers (bisection and SCA), rank-one
//!   extraction, and the beamformer/AN design pipeline.
//! - [`evaluation`]: secrecy rate, SINR surfaces, Monte Carlo sweeps.
//! - [`experiment`]: configuration files, CSV artifacts, the oracle suite.

pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod geometry;
pub mod linalg;
mod seeding;
pub mod optimizer;
pub mod regions;

pub use error::{ConfigError, Error, SolverError};

pub use geometry::{GroundPosition, ScenarioConfig, SteeringVector, SubcarrierAllocation};
pub use linalg::{CMat, CVec};
pub use optimizer::{
    BeamformerPair, DesignGeometry, MaxMinRatioProblem, Scheme, SolverKind, SolverReport, SolverSettings,
};

pub use evaluation::{ErrorModel, OpCountReport, ResultRecord, SinrField, SweepOutcome, SweepRow, SweepSpec};
pub use regions::{CovarianceMatrix, QuadratureSpec, RegionRect, SamplePointSet};

/// Propagation speed used throughout (m/s).
///
/// The round value keeps main-lobe figures such as `c/B = 60 m` at 5 MHz exact.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;
