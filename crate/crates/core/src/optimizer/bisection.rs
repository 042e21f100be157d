//! Bisection on the ratio level with a minimax feasibility certificate.
//!
//! For a level `t`, `f(t) = min_{lambda in simplex} lambda_max(sum lambda_m (A_m - t B_m))`
//! is nonnegative exactly when some unit-trace `R` reaches ratio `t` on every term.
//! Each certificate also yields a dual bound that tightens the bracket.

use super::problem::MaxMinRatioProblem;
use super::SolverSettings;
use crate::error::SolverError;
use crate::linalg::{
    generalized_lambda_max, hermitian_eigen, lambda_max, lambda_min, outer, quad_form,
    unit_trace_identity, CMat, CVec,
};

/// Relaxed optimum of a max-min ratio problem.
#[derive(Debug, Clone)]
pub struct RatioSolution {
    /// Unit-trace PSD maximizer.
    pub matrix: CMat,
    /// Certified lower end of the final bracket.
    pub value: f64,
    /// Certified upper end of the final bracket.
    pub upper_bound: f64,
    /// Lower bracket end after each iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

struct Certificate {
    value: f64,
    /// Whether `value` is the simplex minimum (to tolerance) rather than an upper estimate.
    exact: bool,
    weights: Vec<f64>,
    primal: Option<CMat>,
}

struct Pencil<'a> {
    problem: &'a MaxMinRatioProblem,
    shared_denominator: Option<(f64, f64)>,
}

impl<'a> Pencil<'a> {
    fn new(problem: &'a MaxMinRatioProblem) -> Self {
        let dens = problem.denominators();
        let shared = dens.iter().all(|b| b == &dens[0]);
        let shared_denominator = shared.then(|| {
            let e = hermitian_eigen(&dens[0]);
            (e.bottom(), e.values[0])
        });
        Self {
            problem,
            shared_denominator,
        }
    }

    fn shifted(&self, t: f64) -> Vec<CMat> {
        self.problem.terms().map(|(a, b)| a - b.scale(t)).collect()
    }

    /// Extreme eigenvalues of `sum lambda_m B_m`.
    fn denominator_bounds(&self, weights: &[f64]) -> (f64, f64) {
        if let Some(bounds) = self.shared_denominator {
            return bounds;
        }
        let n = self.problem.dim();
        let mut sum = CMat::zeros(n, n);
        for (w, b) in weights.iter().zip(self.problem.denominators()) {
            sum += b.scale(*w);
        }
        (lambda_min(&sum), lambda_max(&sum))
    }
}

fn combine(mats: &[CMat], weights: &[f64]) -> CMat {
    let n = mats[0].nrows();
    let mut sum = CMat::zeros(n, n);
    for (w, m) in weights.iter().zip(mats) {
        if *w != 0.0 {
            sum += m.scale(*w);
        }
    }
    sum
}

fn certificate(shifted: &[CMat], settings: &SolverSettings) -> Certificate {
    match shifted.len() {
        1 => {
            let (value, u) = hermitian_eigen(&shifted[0]).top();
            Certificate {
                value,
                exact: true,
                weights: vec![1.0],
                primal: Some(outer(&u)),
            }
        }
        2 => two_term_certificate(&shifted[0], &shifted[1], settings.simplex_tol),
        _ => subgradient_certificate(shifted, settings.subgradient_iters),
    }
}

/// `lambda_max(lambda C1 + (1 - lambda) C2)` is convex in `lambda`; bisect on
/// its directional derivative `u^H (C1 - C2) u`.
fn two_term_certificate(c1: &CMat, c2: &CMat, tol: f64) -> Certificate {
    let diff = c1 - c2;
    let eval = |lam: f64| -> (f64, CVec, f64) {
        let m = c2 + diff.scale(lam);
        let (f, u) = hermitian_eigen(&m).top();
        let d = quad_form(&diff, &u);
        (f, u, d)
    };
    let infeasible = |value: f64, lam: f64| Certificate {
        value,
        exact: true,
        weights: vec![lam, 1.0 - lam],
        primal: None,
    };

    let (f0, u0, d0) = eval(0.0);
    if f0 < 0.0 {
        return infeasible(f0, 0.0);
    }
    if d0 >= 0.0 {
        return Certificate {
            value: f0,
            exact: true,
            weights: vec![0.0, 1.0],
            primal: Some(outer(&u0)),
        };
    }
    let (f1, u1, d1) = eval(1.0);
    if f1 < 0.0 {
        return infeasible(f1, 1.0);
    }
    if d1 <= 0.0 {
        return Certificate {
            value: f1,
            exact: true,
            weights: vec![1.0, 0.0],
            primal: Some(outer(&u1)),
        };
    }

    let (mut lo, mut u_lo, mut d_lo) = (0.0, u0, d0);
    let (mut hi, mut u_hi, mut d_hi) = (1.0, u1, d1);
    let (mut best, mut best_lam) = if f0 <= f1 { (f0, 0.0) } else { (f1, 1.0) };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (f, u, d) = eval(mid);
        if f < best {
            best = f;
            best_lam = mid;
        }
        if f < 0.0 {
            return infeasible(f, mid);
        }
        if d < 0.0 {
            lo = mid;
            u_lo = u;
            d_lo = d;
        } else {
            hi = mid;
            u_hi = u;
            d_hi = d;
        }
    }
    // Mixing the two one-sided eigenvectors zeroes the derivative term.
    let theta = d_hi / (d_hi - d_lo);
    let primal = outer(&u_lo).scale(theta) + outer(&u_hi).scale(1.0 - theta);
    Certificate {
        value: best,
        exact: true,
        weights: vec![best_lam, 1.0 - best_lam],
        primal: Some(primal),
    }
}

fn project_simplex(y: &mut [f64]) {
    let mut sorted: Vec<f64> = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, s) in sorted.iter().enumerate() {
        cum += s;
        let cand = (cum - 1.0) / (k as f64 + 1.0);
        if s - cand > 0.0 {
            tau = cand;
        }
    }
    for v in y.iter_mut() {
        *v = (*v - tau).max(0.0);
    }
}

/// Projected subgradient on the simplex for three or more terms, with
/// step-weighted averaging of the eigenvector outer products as primal.
fn subgradient_certificate(shifted: &[CMat], iters: usize) -> Certificate {
    let m = shifted.len();
    let n = shifted[0].nrows();
    let mut lam = vec![1.0 / m as f64; m];
    let mut best = f64::INFINITY;
    let mut best_lam = lam.clone();
    let mut avg = CMat::zeros(n, n);
    let mut avg_weight = 0.0;
    for k in 0..iters.max(1) {
        let (f, u) = hermitian_eigen(&combine(shifted, &lam)).top();
        if f < best {
            best = f;
            best_lam = lam.clone();
        }
        if f < 0.0 {
            return Certificate {
                value: f,
                exact: true,
                weights: lam,
                primal: None,
            };
        }
        let g: Vec<f64> = shifted.iter().map(|c| quad_form(c, &u)).collect();
        let mean = g.iter().sum::<f64>() / m as f64;
        let spread = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>().sqrt();
        if spread <= f64::EPSILON * f.abs().max(1.0) {
            avg = outer(&u);
            avg_weight = 1.0;
            break;
        }
        let step = 1.0 / (spread * ((k + 1) as f64).sqrt());
        if k >= iters / 2 {
            avg += outer(&u).scale(step);
            avg_weight += step;
        }
        for (l, gi) in lam.iter_mut().zip(&g) {
            *l -= step * gi;
        }
        project_simplex(&mut lam);
    }
    let primal = (avg_weight > 0.0).then(|| avg.unscale(avg_weight));
    Certificate {
        value: best,
        exact: false,
        weights: best_lam,
        primal,
    }
}

fn initial_upper_bound(problem: &MaxMinRatioProblem) -> Result<(f64, Vec<CVec>), SolverError> {
    let mut hi = f64::INFINITY;
    let mut vectors = Vec::with_capacity(problem.len());
    for (index, (a, b)) in problem.terms().enumerate() {
        let (value, u) =
            generalized_lambda_max(a, b).ok_or(SolverError::NotPositiveDefinite { index })?;
        hi = hi.min(value);
        vectors.push(u);
    }
    Ok((hi, vectors))
}

/// Maximizes `min_m tr(R A_m) / tr(R B_m)` over unit-trace PSD `R`.
pub fn solve_maxmin_ratio(
    problem: &MaxMinRatioProblem,
    settings: &SolverSettings,
) -> Result<RatioSolution, SolverError> {
    let n = problem.dim();
    let pencil = Pencil::new(problem);
    let (mut t_hi, candidates) = initial_upper_bound(problem)?;

    let mut best = unit_trace_identity(n);
    let mut t_lo = problem.min_ratio(&best);
    for u in &candidates {
        let r = outer(u);
        let rho = problem.min_ratio(&r);
        if rho > t_lo {
            t_lo = rho;
            best = r;
        }
    }
    let mut certified_lo = t_lo;
    let mut trace = vec![t_lo];
    let mut iterations = 0;

    let gap = |lo: f64, hi: f64| hi - lo <= settings.bisection_tol * hi.abs();
    while !gap(certified_lo, t_hi) {
        if iterations >= settings.max_outer_iters {
            return Err(SolverError::NoConvergence { iterations });
        }
        iterations += 1;
        // Alternate probes at the current lower end (tightens the dual bound)
        // with plain midpoints (guarantees bracket halving).
        let t = if iterations % 2 == 1 {
            certified_lo
        } else {
            0.5 * (certified_lo + t_hi)
        };
        let cert = certificate(&pencil.shifted(t), settings);
        let (den_min, den_max) = pencil.denominator_bounds(&cert.weights);
        if cert.value >= 0.0 {
            if cert.exact {
                certified_lo = certified_lo.max(t);
            }
            if let Some(r) = cert.primal {
                let rho = problem.min_ratio(&r);
                if rho > t_lo {
                    t_lo = rho;
                    best = r;
                    certified_lo = certified_lo.max(rho);
                }
            }
            t_hi = t_hi.min(t + cert.value / den_min);
        } else {
            t_hi = t_hi.min(t + cert.value / den_max);
        }
        if t_hi < certified_lo {
            t_hi = certified_lo;
        }
        trace.push(certified_lo);
    }

    let trace_norm = crate::linalg::trace_re(&best);
    Ok(RatioSolution {
        matrix: best.unscale(trace_norm),
        value: certified_lo,
        upper_bound: t_hi,
        trace,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection_sums_to_one() {
        let mut y = vec![0.7, -0.2, 0.9];
        project_simplex(&mut y);
        assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(y.iter().all(|v| *v >= 0.0));
    }
}
