//! Rank-one extraction from a relaxed covariance solution.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::problem::MaxMinRatioProblem;
use crate::linalg::{hermitian_eigen, normalized, trace_product, CMat, CVec};
use crate::seeding::{rng, Stream};

/// `lambda_2 / lambda_1` below which `R` is treated as rank one.
pub const RANK_ONE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtractionMethod {
    /// `R` was numerically rank one; its principal eigenvector is returned.
    #[default]
    Principal,
    /// Best of the randomized and deterministic candidates.
    Randomized,
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub vector: CVec,
    pub min_ratio: f64,
    pub method: ExtractionMethod,
    /// Index of the winning candidate.
    pub candidate: usize,
}

/// Unit-norm vector approximating the relaxed optimum `r`.
///
/// When `r` is not rank one the candidates are, in order: the principal
/// eigenvector, a rank-reduced solution with the same per-term ratios (when
/// one exists), then `count` random draws shaped by `r`. Even draws are
/// complex Gaussian `U Lambda^{1/2} z`; odd draws use unit-modulus `z`. The
/// candidate with the largest min ratio wins and ties go to the lowest index.
pub fn rank_one_extract(
    r: &CMat,
    problem: &MaxMinRatioProblem,
    count: usize,
    seed: u64,
) -> Extraction {
    let eig = hermitian_eigen(r);
    let (l1, top) = eig.top();
    let l2 = eig.values.get(1).copied().unwrap_or(0.0);
    if l1 <= 0.0 || l2 / l1 < RANK_ONE_THRESHOLD {
        let min_ratio = problem.min_ratio_vector(&top);
        return Extraction {
            vector: top,
            min_ratio,
            method: ExtractionMethod::Principal,
            candidate: 0,
        };
    }

    let n = r.nrows();
    let shape = CMat::from_fn(n, n, |i, k| {
        eig.vectors[(i, k)] * eig.values[k].max(0.0).sqrt()
    });

    let mut best = (problem.min_ratio_vector(&top), top, 0usize);
    let consider = |v: CVec, index: usize, best: &mut (f64, CVec, usize)| {
        let value = problem.min_ratio_vector(&v);
        if value > best.0 {
            *best = (value, v, index);
        }
    };

    if let Some(v) = purify(r, problem) {
        consider(v, 1, &mut best);
    }

    let mut rng = rng(seed, Stream::Randomization, 0);
    for i in 0..count {
        let z = CVec::from_fn(n, |_, _| {
            if i % 2 == 0 {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            } else {
                Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
            }
        });
        let v = &shape * z;
        if v.norm() > 0.0 {
            consider(normalized(&v), i + 2, &mut best);
        }
    }

    Extraction {
        vector: best.1,
        min_ratio: best.0,
        method: ExtractionMethod::Randomized,
        candidate: best.2,
    }
}

/// Rank reduction that keeps `tr(R (A_m - rho B_m))` and `tr R` fixed.
///
/// With `R = V V^H` of rank `r`, any Hermitian `Delta` in the null space of
/// the `r x r` constraint maps moves `R` along `V (I - s Delta) V^H`; choosing
/// `s = 1 / lambda_max(Delta)` drops at least one rank. Succeeds when the
/// number of constraints is below `r^2` all the way down to rank one.
fn purify(r: &CMat, problem: &MaxMinRatioProblem) -> Option<CVec> {
    let n = r.nrows();
    let rho = problem.min_ratio(r);
    let mut constraints: Vec<CMat> = problem.terms().map(|(a, b)| a - b.scale(rho)).collect();
    constraints.push(CMat::identity(n, n));

    let mut current = r.clone();
    for _ in 0..n {
        let eig = hermitian_eigen(&current);
        let floor = eig.values[0] * 1e-10;
        let rank = eig.values.iter().filter(|v| **v > floor).count();
        if rank == 1 {
            let v = eig.vectors.column(0).into_owned();
            return Some(normalized(&v));
        }
        if rank * rank <= constraints.len() {
            return None;
        }
        let v = CMat::from_fn(n, rank, |i, k| eig.vectors[(i, k)] * eig.values[k].sqrt());
        let delta = null_direction(&v, &constraints, rank)?;
        let de = hermitian_eigen(&delta);
        let (top, bottom) = (de.values[0], de.bottom());
        let (delta, scale) = if top >= -bottom {
            (delta, top)
        } else {
            (-delta, -bottom)
        };
        if scale <= 0.0 {
            return None;
        }
        let core = CMat::identity(rank, rank) - delta.unscale(scale);
        current = &v * core * v.adjoint();
        current = crate::linalg::hermitian_part(&current);
    }
    None
}

/// Hermitian `Delta` (r x r) with `tr(V Delta V^H C) = 0` for every constraint.
fn null_direction(v: &CMat, constraints: &[CMat], rank: usize) -> Option<CMat> {
    let params = rank * rank;
    // Real parametrization: diagonal entries, then (re, im) of the upper triangle.
    let basis = |p: usize| -> CMat {
        let mut d = CMat::zeros(rank, rank);
        if p < rank {
            d[(p, p)] = Complex64::new(1.0, 0.0);
            return d;
        }
        let q = p - rank;
        let pair = q / 2;
        let (mut i, mut j, mut seen) = (0, 1, 0);
        'outer: for a in 0..rank {
            for b in (a + 1)..rank {
                if seen == pair {
                    i = a;
                    j = b;
                    break 'outer;
                }
                seen += 1;
            }
        }
        let val = if q.is_multiple_of(2) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 1.0)
        };
        d[(i, j)] = val;
        d[(j, i)] = val.conj();
        d
    };
    let reduced: Vec<CMat> = constraints.iter().map(|c| v.adjoint() * c * v).collect();
    let mut rows = DMatrix::<f64>::zeros(reduced.len(), params);
    for p in 0..params {
        let b = basis(p);
        for (k, red) in reduced.iter().enumerate() {
            rows[(k, p)] = trace_product(&b, red);
        }
    }
    // Orthogonal projector onto the null space via SVD of the constraint rows.
    let svd = rows.clone().svd(false, true);
    let vt = svd.v_t?;
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut z = DVector::<f64>::from_fn(params, |p, _| ((p + 1) as f64 * 0.7548776662).sin());
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > 1e-12 * smax.max(1e-300) {
            let row = vt.row(k).transpose();
            let c = row.dot(&z);
            z -= row * c;
        }
    }
    if z.norm() < 1e-9 {
        return None;
    }
    let mut delta = CMat::zeros(rank, rank);
    for p in 0..params {
        delta += basis(p).scale(z[p]);
    }
    Some(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::outer;

    fn diag(values: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(
            values.len(),
            values.iter().map(|v| Complex64::new(*v, 0.0)),
        ))
    }

    #[test]
    fn principal_for_rank_one_input() {
        let u = normalized(&CVec::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ]));
        let p = MaxMinRatioProblem::new(vec![diag(&[1.0, 2.0])], vec![diag(&[1.0, 1.0])]).unwrap();
        let e = rank_one_extract(&outer(&u), &p, 10, 1);
        assert_eq!(e.method, ExtractionMethod::Principal);
        assert!((e.vector.dotc(&u).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purification_reaches_rank_one_for_two_terms() {
        let p = MaxMinRatioProblem::new(
            vec![diag(&[2.0, 0.0]), diag(&[0.0, 2.0])],
            vec![diag(&[1.0, 1.0])],
        )
        .unwrap();
        let r = diag(&[0.5, 0.5]);
        let v = purify(&r, &p).expect("two terms admit a rank-one point");
        assert!((p.min_ratio_vector(&v) - 1.0).abs() < 1e-9);
    }
}
