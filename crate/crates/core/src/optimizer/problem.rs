use crate::error::SolverError;
use crate::geometry::ScenarioConfig;
use crate::linalg::{cholesky, hermitian_eigen, is_hermitian, quad_form, trace_product, trace_re, CMat, CVec};
use crate::regions::CovarianceMatrix;

/// `max_R min_m tr(R A_m) / tr(R B_m)` over unit-trace PSD `R`.
///
/// Numerators are PSD, denominators positive definite. The `alpha P` and
/// `sigma^2 I` terms are already folded into the matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMinRatioProblem {
    numerators: Vec<CMat>,
    denominators: Vec<CMat>,
}

impl MaxMinRatioProblem {
    /// `denominators` may hold a single matrix shared by every term.
    pub fn new(numerators: Vec<CMat>, mut denominators: Vec<CMat>) -> Result<Self, SolverError> {
        if numerators.is_empty() || denominators.is_empty() {
            return Err(SolverError::Empty);
        }
        if denominators.len() == 1 && numerators.len() > 1 {
            denominators = vec![denominators[0].clone(); numerators.len()];
        }
        if denominators.len() != numerators.len() {
            return Err(SolverError::Empty);
        }
        let n = numerators[0].nrows();
        for m in numerators.iter().chain(&denominators) {
            if m.nrows() != n || m.ncols() != n {
                return Err(SolverError::Dimension {
                    expected: n,
                    found_rows: m.nrows(),
                    found_cols: m.ncols(),
                });
            }
        }
        for (index, a) in numerators.iter().enumerate() {
            let scale = a.norm().max(1e-300);
            if !is_hermitian(a, 1e-9 * scale) {
                return Err(SolverError::NotPositiveSemidefinite { index });
            }
            let tr = trace_re(a).abs().max(1e-300);
            if hermitian_eigen(a).bottom() < -1e-9 * tr {
                return Err(SolverError::NotPositiveSemidefinite { index });
            }
        }
        for (index, b) in denominators.iter().enumerate() {
            let scale = b.norm().max(1e-300);
            if !is_hermitian(b, 1e-9 * scale) || cholesky(b).is_none() {
                return Err(SolverError::NotPositiveDefinite { index });
            }
        }
        Ok(Self {
            numerators,
            denominators,
        })
    }

    /// Confidential-beam problem: `A_m = alpha1 P R_dm`, shared
    /// `B = alpha1 P R_e + sigma^2 I`.
    pub fn slnr(
        cfg: &ScenarioConfig,
        desired: &[CovarianceMatrix],
        wiretap: &CovarianceMatrix,
    ) -> Result<Self, SolverError> {
        let g = cfg.alpha1 * cfg.total_power;
        let n = wiretap.dim();
        let b = wiretap.entries.scale(g) + CMat::identity(n, n).scale(cfg.noise_power);
        let a = desired.iter().map(|d| d.entries.scale(g)).collect();
        Self::new(a, vec![b])
    }

    /// Artificial-noise problem: shared numerator `alpha2 P R_e` (AN delivered
    /// to the wiretap set) over per-user `alpha2 P R_dm + sigma^2 I`.
    pub fn anlnr(
        cfg: &ScenarioConfig,
        desired: &[CovarianceMatrix],
        wiretap: &CovarianceMatrix,
    ) -> Result<Self, SolverError> {
        let g = cfg.alpha2 * cfg.total_power;
        let n = wiretap.dim();
        let a = wiretap.entries.scale(g);
        let b = desired
            .iter()
            .map(|d| d.entries.scale(g) + CMat::identity(n, n).scale(cfg.noise_power))
            .collect::<Vec<_>>();
        Self::new(vec![a; desired.len()], b)
    }

    pub fn dim(&self) -> usize {
        self.numerators[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn numerators(&self) -> &[CMat] {
        &self.numerators
    }

    pub fn denominators(&self) -> &[CMat] {
        &self.denominators
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CMat, &CMat)> {
        self.numerators.iter().zip(&self.denominators)
    }

    pub fn ratios(&self, r: &CMat) -> Vec<f64> {
        self.terms()
            .map(|(a, b)| trace_product(r, a) / trace_product(r, b))
            .collect()
    }

    pub fn min_ratio(&self, r: &CMat) -> f64 {
        self.ratios(r).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn min_ratio_vector(&self, v: &CVec) -> f64 {
        self.terms()
            .map(|(a, b)| quad_form(a, v) / quad_form(b, v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Multiplies every numerator by `num` and every denominator by `den`.
    pub fn scaled(&self, num: f64, den: f64) -> Self {
        Self {
            numerators: self.numerators.iter().map(|a| a.scale(num)).collect(),
            denominators: self.denominators.iter().map(|b| b.scale(den)).collect(),
        }
    }
}
