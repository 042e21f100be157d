//! Max-min ratio solvers and the beamformer / artificial-noise design pipeline.
//!
//! Both design steps reduce to maximizing `min_m tr(R A_m) / tr(R B_m)` over
//! unit-trace PSD `R`, followed by extraction of a unit-norm vector. Two
//! independent solvers are provided: [`solve_maxmin_ratio`] (bisection with a
//! minimax certificate) and [`sca_solve`] (successive convex approximation).

mod bisection;
mod design;
mod problem;
mod rank_one;
mod sca;

pub use bisection::{solve_maxmin_ratio, RatioSolution};
pub use design::{
    build_covariances, design_beamformers, design_from_covariances, BeamformerPair, DesignGeometry,
    Scheme, SchemeCovariances,
};
pub use problem::MaxMinRatioProblem;
pub use rank_one::{rank_one_extract, Extraction, ExtractionMethod, RANK_ONE_THRESHOLD};
pub use sca::{sca_solve, sca_solve_from, ScaSolution};

/// Which relaxed solver the design pipeline uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Bisection,
    Sca,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Relative bracket width at which bisection stops.
    pub bisection_tol: f64,
    pub max_outer_iters: usize,
    /// Relative objective change at which SCA stops.
    pub sca_tol: f64,
    /// Start SCA from a seeded random PSD matrix instead of `I / N`.
    pub sca_random_start: bool,
    /// Number of randomized candidates in rank-one extraction.
    pub randomization_count: usize,
    /// Interval width for the two-term simplex search.
    pub simplex_tol: f64,
    /// Iterations of the simplex subgradient search for three or more terms.
    pub subgradient_iters: usize,
    pub solver: SolverKind,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            bisection_tol: 1e-6,
            max_outer_iters: 200,
            sca_tol: 1e-9,
            sca_random_start: false,
            randomization_count: 1000,
            simplex_tol: 1e-8,
            subgradient_iters: 500,
            solver: SolverKind::Bisection,
        }
    }
}

/// Convergence summary for one design step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverReport {
    /// Objective after each outer iteration (bracket lower end or SCA value).
    pub objective_trace: Vec<f64>,
    /// Optimal value of the relaxed problem.
    pub relaxed_value: f64,
    /// Min ratio reached by the extracted unit vector.
    pub achieved_min_ratio: f64,
    /// `(relaxed - achieved) / relaxed`.
    pub relaxation_gap: f64,
    pub iterations: usize,
    pub extraction: ExtractionMethod,
}
