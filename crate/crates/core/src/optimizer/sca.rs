//! Successive convex approximation on the log of the min ratio.
//!
//! Each outer step linearizes `ln tr(R B_m)` at the current iterate, which
//! gives the concave minorant
//! `g_m(R) = ln tr(R A_m) - tr(R B_m) / beta_m - ln beta_m + 1`, `beta_m = tr(R~ B_m)`.
//! `max_R min_m g_m(R)` is solved over a growing subspace:
//! `R = V W V^H + rho (I - V V^H)`, with the small PSD matrix `W` fitted by a
//! log-det barrier Newton method and the top eigenvector of the Lagrangian
//! gradient appended to `V` until the optimality gap closes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::problem::MaxMinRatioProblem;
use super::SolverSettings;
use crate::error::SolverError;
use crate::linalg::{
    cholesky, hermitian_eigen, hermitian_part, is_hermitian, trace_product, trace_re, CMat, CVec,
};
use crate::seeding::{rng, Stream};

/// Barrier duality gap `(variables) / s` at which the inner solve stops.
const MASTER_TOL: f64 = 1e-8;
/// Pricing gap `lambda_max(G) - tr(R G)` at which a surrogate counts as solved.
const GAP_TOL: f64 = 1e-8;
const MAX_EXPANSIONS: usize = 200;
/// Eigenvalues of `W` below this fraction of the largest are dropped when
/// the subspace is rebuilt.
const DROP_BELOW: f64 = 1e-10;

/// Result of the SCA route.
#[derive(Debug, Clone)]
pub struct ScaSolution {
    pub matrix: CMat,
    /// `min_m tr(R A_m) / tr(R B_m)` at the returned matrix.
    pub value: f64,
    /// Min ratio at the start and after every outer iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
}

fn real_diag(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(
        values.len(),
        values.iter().map(|v| Complex64::new(*v, 0.0)),
    ))
}

/// `R = V W V^H + rho (I - V V^H)` with orthonormal `V` (N x k).
#[derive(Debug, Clone)]
struct Iterate {
    basis: CMat,
    weight: CMat,
    /// Isotropic mass on the orthogonal complement; `None` once dropped.
    remainder: Option<f64>,
}

impl Iterate {
    fn isotropic(n: usize) -> Self {
        Self {
            basis: CMat::zeros(n, 0),
            weight: CMat::zeros(0, 0),
            remainder: Some(1.0 / n as f64),
        }
    }

    fn from_matrix(r: &CMat) -> Self {
        let n = r.nrows();
        let eig = hermitian_eigen(r);
        let floor = eig.values[0] * DROP_BELOW;
        let keep: Vec<usize> = (0..n).filter(|&k| eig.values[k] > floor).collect();
        let basis = CMat::from_fn(n, keep.len(), |i, c| eig.vectors[(i, keep[c])]);
        let values: Vec<f64> = keep.iter().map(|&k| eig.values[k]).collect();
        let mut it = Self {
            basis,
            weight: real_diag(&values),
            remainder: None,
        };
        it.normalize();
        it
    }

    fn dim(&self) -> usize {
        self.basis.nrows()
    }

    fn rank(&self) -> usize {
        self.basis.ncols()
    }

    fn normalize(&mut self) {
        let tr = trace_re(&self.weight)
            + self.remainder.unwrap_or(0.0) * (self.dim() - self.rank()) as f64;
        self.weight.unscale_mut(tr);
        if let Some(rho) = self.remainder.as_mut() {
            *rho /= tr;
        }
    }

    fn matrix(&self) -> CMat {
        let n = self.dim();
        let v = &self.basis;
        let mut r = v * &self.weight * v.adjoint();
        if let Some(rho) = self.remainder {
            r += (CMat::identity(n, n) - v * v.adjoint()).scale(rho);
        }
        hermitian_part(&r)
    }

    /// Rebuilds the basis from the significant eigenvectors of `W` plus
    /// `direction`, re-expressing the current matrix in the new basis.
    /// Returns `false` if `direction` already lies in the span.
    fn expand(&mut self, direction: &CVec) -> bool {
        let n = self.dim();
        let rho = self.remainder.unwrap_or(0.0);
        let (mut cols, mut diag) = (Vec::new(), Vec::new());
        let mut scale = rho;
        if self.rank() > 0 {
            let eig = hermitian_eigen(&self.weight);
            scale = scale.max(eig.values[0]);
            let rotated = &self.basis * &eig.vectors;
            for k in 0..self.rank() {
                if eig.values[k] > DROP_BELOW * scale {
                    cols.push(rotated.column(k).into_owned());
                    diag.push(eig.values[k]);
                }
            }
        }

        let mut u = direction.clone();
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&u);
                u -= c * proj;
            }
        }
        let norm = u.norm();
        if norm < 1e-8 {
            return false;
        }
        cols.push(u.unscale(norm));
        // The new direction comes from the old complement, where R had mass rho.
        diag.push(rho);
        if rho < DROP_BELOW * scale || cols.len() >= n {
            self.remainder = None;
        }
        self.basis = CMat::from_columns(&cols);
        self.weight = real_diag(&diag);
        self.normalize();
        true
    }
}

/// Real coordinates of a Hermitian `k x k` matrix: the diagonal, then
/// `(re, im)` of each upper-triangle entry.
struct HermitianCoords {
    k: usize,
    pairs: Vec<(usize, usize)>,
}

impl HermitianCoords {
    fn new(k: usize) -> Self {
        let pairs = (0..k).flat_map(|i| ((i + 1)..k).map(move |j| (i, j))).collect();
        Self { k, pairs }
    }

    fn len(&self) -> usize {
        self.k * self.k
    }

    /// `tr(E_p M)` for each basis element `E_p`, so `tr(W M) = z . functional(M)`.
    fn functional(&self, m: &CMat) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.k).map(|i| m[(i, i)].re).collect();
        for &(i, j) in &self.pairs {
            out.push(2.0 * m[(i, j)].re);
            out.push(2.0 * m[(i, j)].im);
        }
        out
    }

    fn matrix(&self, z: &[f64]) -> CMat {
        let mut w = CMat::zeros(self.k, self.k);
        for i in 0..self.k {
            w[(i, i)] = Complex64::new(z[i], 0.0);
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let v = Complex64::new(z[self.k + 2 * p], z[self.k + 2 * p + 1]);
            w[(i, j)] = v;
            w[(j, i)] = v.conj();
        }
        w
    }

    fn coords(&self, w: &CMat) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.k).map(|i| w[(i, i)].re).collect();
        for &(i, j) in &self.pairs {
            out.push(w[(i, j)].re);
            out.push(w[(i, j)].im);
        }
        out
    }

    fn basis(&self, p: usize) -> CMat {
        let mut z = vec![0.0; self.len()];
        z[p] = 1.0;
        self.matrix(&z)
    }
}

/// Surrogate maximization restricted to the current subspace.
struct Master<'a> {
    coords: HermitianCoords,
    has_remainder: bool,
    /// Linear functionals `tr(R A_m)` and `tr(R B_m)` in the variables.
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    /// Coefficients of `tr R`.
    trace: Vec<f64>,
    beta: &'a [f64],
}

struct MasterPoint {
    vars: Vec<f64>,
    duals: Vec<f64>,
    barrier_weight: f64,
}

impl<'a> Master<'a> {
    fn new(problem: &MaxMinRatioProblem, it: &Iterate, beta: &'a [f64]) -> Self {
        let k = it.rank();
        let n = it.dim();
        let coords = HermitianCoords::new(k);
        let v = &it.basis;
        let has_remainder = it.remainder.is_some();
        let reduce = |m: &CMat| -> Vec<f64> {
            let red = v.adjoint() * m * v;
            let mut f = coords.functional(&red);
            if has_remainder {
                f.push(trace_re(m) - trace_re(&red));
            }
            f
        };
        let x = problem.numerators().iter().map(reduce).collect();
        let y = problem.denominators().iter().map(reduce).collect();
        let mut trace = coords.functional(&CMat::identity(k, k));
        if has_remainder {
            trace.push((n - k) as f64);
        }
        Self {
            coords,
            has_remainder,
            x,
            y,
            trace,
            beta,
        }
    }

    fn nvars(&self) -> usize {
        self.trace.len()
    }

    fn vars_of(&self, it: &Iterate) -> Vec<f64> {
        let mut z = self.coords.coords(&it.weight);
        if let Some(rho) = it.remainder {
            z.push(rho);
        }
        z
    }

    fn apply(&self, it: &mut Iterate, z: &[f64]) {
        it.weight = self.coords.matrix(&z[..self.coords.len()]);
        if self.has_remainder {
            it.remainder = Some(z[self.coords.len()]);
        }
        it.normalize();
    }

    fn surrogate(&self, z: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let dot = |row: &Vec<f64>| row.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
        let x: Vec<f64> = self.x.iter().map(dot).collect();
        if x.iter().any(|v| *v <= 0.0) {
            return None;
        }
        let g = x
            .iter()
            .zip(self.y.iter().map(dot))
            .zip(self.beta)
            .map(|((xm, ym), b)| xm.ln() - ym / b - b.ln() + 1.0)
            .collect();
        Some((g, x))
    }

    /// `ln det W + ln rho`, or `None` outside the cone.
    fn log_det(&self, z: &[f64]) -> Option<f64> {
        let k = self.coords.k;
        let mut total = 0.0;
        if k > 0 {
            let l = cholesky(&self.coords.matrix(&z[..self.coords.len()]))?;
            total += (0..k).map(|i| 2.0 * l[(i, i)].re.ln()).sum::<f64>();
        }
        if self.has_remainder {
            let rho = z[self.coords.len()];
            if rho <= 0.0 {
                return None;
            }
            total += rho.ln();
        }
        Some(total)
    }

    /// Increase of the barrier objective from `(z, t)` to `(z_new, t_new)`,
    /// summed as log ratios so it stays accurate when `s` is large.
    fn barrier_gain(&self, s: f64, z: &[f64], t: f64, z_new: &[f64], t_new: f64) -> Option<f64> {
        let ld_new = self.log_det(z_new)?;
        let ld = self.log_det(z)?;
        let (g, _) = self.surrogate(z)?;
        let (g_new, _) = self.surrogate(z_new)?;
        let mut gain = s * (t_new - t) + (ld_new - ld);
        for (a, b) in g.iter().zip(&g_new) {
            let new = b - t_new;
            if new <= 0.0 {
                return None;
            }
            gain += (new / (a - t)).ln();
        }
        Some(gain)
    }

    /// Gradient and Hessian of `ln det W + ln rho`.
    fn cone_derivatives(&self, z: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let q = self.nvars();
        let kk = self.coords.len();
        let mut grad = vec![0.0; q];
        let mut hess = DMatrix::<f64>::zeros(q, q);
        if self.coords.k > 0 {
            let w_inv = self
                .coords
                .matrix(&z[..kk])
                .try_inverse()
                .expect("interior weight is invertible");
            grad[..kk].copy_from_slice(&self.coords.functional(&w_inv));
            for p in 0..kk {
                let row = self.coords.functional(&(&w_inv * self.coords.basis(p) * &w_inv));
                for (r, value) in row.iter().enumerate() {
                    hess[(p, r)] = -value;
                }
            }
        }
        if self.has_remainder {
            let rho = z[kk];
            grad[kk] = 1.0 / rho;
            hess[(kk, kk)] = -1.0 / (rho * rho);
        }
        (grad, hess)
    }

    fn solve(&self, start: &[f64], warm: Option<f64>) -> MasterPoint {
        let q = self.nvars();
        let m = self.beta.len();
        // Interior reference point: identity on the subspace and on the complement.
        let mut center = self.coords.coords(&CMat::identity(self.coords.k, self.coords.k));
        if self.has_remainder {
            center.push(1.0);
        }
        let total: f64 = self.trace.iter().zip(&center).map(|(a, b)| a * b).sum();
        center.iter_mut().for_each(|c| *c /= total);

        let (mix, mut s) = match warm {
            Some(s_prev) => (1e-3, (s_prev * 1e-4).max(1.0)),
            None => (1e-2, 1.0),
        };
        let mut z: Vec<f64> = start
            .iter()
            .zip(&center)
            .map(|(a, c)| (1.0 - mix) * a + mix * c)
            .collect();
        let (g0, _) = self.surrogate(&z).expect("start has positive numerators");
        let mut t = g0.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0 / s;

        loop {
            let centered = self.center(s, &mut z, &mut t);
            if !centered || (q + m) as f64 / s < MASTER_TOL {
                break;
            }
            s *= 20.0;
        }
        let (g, _) = self.surrogate(&z).expect("interior point");
        let mut duals: Vec<f64> = g.iter().map(|gm| 1.0 / (s * (gm - t))).collect();
        let sum: f64 = duals.iter().sum();
        duals.iter_mut().for_each(|d| *d /= sum);
        MasterPoint {
            vars: z,
            duals,
            barrier_weight: s,
        }
    }

    /// Equality-constrained Newton iterations for a fixed barrier weight `s`.
    /// Returns `false` if the line search stalls before the decrement vanishes.
    fn center(&self, s: f64, z: &mut [f64], t: &mut f64) -> bool {
        let q = self.nvars();
        let m = self.beta.len();
        let dim = q + 1;
        for _ in 0..100 {
            let (g, x) = self.surrogate(z).expect("interior point");
            let (cone_grad, cone_hess) = self.cone_derivatives(z);

            let mut grad = DVector::<f64>::zeros(dim);
            let mut hess = DMatrix::<f64>::zeros(dim, dim);
            grad.rows_mut(0, q).copy_from_slice(&cone_grad);
            hess.view_mut((0, 0), (q, q)).copy_from(&cone_hess);
            grad[q] = s;
            for mi in 0..m {
                let sl = g[mi] - *t;
                let xs = &self.x[mi];
                let a: Vec<f64> = (0..q)
                    .map(|j| xs[j] / x[mi] - self.y[mi][j] / self.beta[mi])
                    .collect();
                let curv = 1.0 / (x[mi] * x[mi] * sl);
                let sl2 = sl * sl;
                for i in 0..q {
                    grad[i] += a[i] / sl;
                    for j in 0..q {
                        hess[(i, j)] -= xs[i] * xs[j] * curv + a[i] * a[j] / sl2;
                    }
                    hess[(i, q)] += a[i] / sl2;
                    hess[(q, i)] += a[i] / sl2;
                }
                grad[q] -= 1.0 / sl;
                hess[(q, q)] -= 1.0 / sl2;
            }

            let mut kkt = DMatrix::<f64>::zeros(dim + 1, dim + 1);
            kkt.view_mut((0, 0), (dim, dim)).copy_from(&hess);
            for j in 0..q {
                kkt[(j, dim)] = self.trace[j];
                kkt[(dim, j)] = self.trace[j];
            }
            let mut rhs = DVector::<f64>::zeros(dim + 1);
            rhs.rows_mut(0, dim).copy_from(&(-&grad));
            // Pulls back onto tr R = 1 if rounding drifted.
            rhs[dim] = 1.0 - self.trace.iter().zip(z.iter()).map(|(a, b)| a * b).sum::<f64>();
            // Symmetric diagonal scaling: the log-det Hessian spans many decades.
            let scale: Vec<f64> = (0..=dim)
                .map(|i| match kkt[(i, i)].abs() {
                    d if i < dim && d > 0.0 => 1.0 / d.sqrt(),
                    _ => 1.0,
                })
                .collect();
            for i in 0..=dim {
                for j in 0..=dim {
                    kkt[(i, j)] *= scale[i] * scale[j];
                }
                rhs[i] *= scale[i];
            }
            let Some(sol) = kkt.lu().solve(&rhs) else {
                return false;
            };
            let step = DVector::from_fn(dim, |i, _| sol[i] * scale[i]);
            let decrement = grad.dot(&step);
            // Negative values only arise from rounding in the KKT solve.
            if decrement < 1e-8 {
                return true;
            }

            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let z_new: Vec<f64> = (0..q).map(|j| z[j] + alpha * step[j]).collect();
                let t_new = *t + alpha * step[q];
                if let Some(gain) = self.barrier_gain(s, z, *t, &z_new, t_new) {
                    if gain >= 0.25 * alpha * decrement {
                        z.copy_from_slice(&z_new);
                        *t = t_new;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                return decrement < 1e-6;
            }
        }
        false
    }
}

/// Maximizes the minorant built at `it`; updates `it` in place.
fn solve_surrogate(problem: &MaxMinRatioProblem, it: &mut Iterate) -> Result<(), SolverError> {
    let r0 = it.matrix();
    let beta: Vec<f64> = problem
        .denominators()
        .iter()
        .map(|b| trace_product(&r0, b))
        .collect();
    let mut warm = None;
    for _ in 0..MAX_EXPANSIONS {
        let master = Master::new(problem, it, &beta);
        let point = master.solve(&master.vars_of(it), warm);
        warm = Some(point.barrier_weight);
        master.apply(it, &point.vars);

        let r = it.matrix();
        let n = problem.dim();
        let mut grad = CMat::zeros(n, n);
        for (mi, (a, b)) in problem.terms().enumerate() {
            let mu = point.duals[mi];
            grad += a.scale(mu / trace_product(&r, a)) - b.scale(mu / beta[mi]);
        }
        let (top, u) = hermitian_eigen(&grad).top();
        let current = trace_product(&r, &grad);
        if top - current <= GAP_TOL * top.abs().max(1.0) || !it.expand(&u) {
            return Ok(());
        }
    }
    Err(SolverError::NoConvergence {
        iterations: MAX_EXPANSIONS,
    })
}

fn random_start(n: usize, seed: u64) -> CMat {
    let mut rng = rng(seed, Stream::ScaStart, 0);
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    let r = &g * g.adjoint();
    let tr = trace_re(&r);
    r.unscale(tr)
}

/// SCA from `I/N`, or from a seeded random PSD start when
/// `settings.sca_random_start` is set.
pub fn sca_solve(
    problem: &MaxMinRatioProblem,
    settings: &SolverSettings,
    seed: u64,
) -> Result<ScaSolution, SolverError> {
    let n = problem.dim();
    let start = if settings.sca_random_start {
        Iterate::from_matrix(&random_start(n, seed))
    } else {
        Iterate::isotropic(n)
    };
    run(problem, settings, start)
}

/// SCA from an explicit PSD starting matrix (rescaled to unit trace).
pub fn sca_solve_from(
    problem: &MaxMinRatioProblem,
    settings: &SolverSettings,
    init: &CMat,
) -> Result<ScaSolution, SolverError> {
    let n = problem.dim();
    if init.nrows() != n || init.ncols() != n {
        return Err(SolverError::Dimension {
            expected: n,
            found_rows: init.nrows(),
            found_cols: init.ncols(),
        });
    }
    let tr = trace_re(init);
    if !is_hermitian(init, 1e-9 * init.norm())
        || tr <= 0.0
        || hermitian_eigen(init).bottom() < -1e-9 * tr
    {
        return Err(SolverError::NotPositiveSemidefinite { index: 0 });
    }
    run(problem, settings, Iterate::from_matrix(&init.unscale(tr)))
}

fn run(
    problem: &MaxMinRatioProblem,
    settings: &SolverSettings,
    mut it: Iterate,
) -> Result<ScaSolution, SolverError> {
    let mut best = it.matrix();
    let mut value = problem.min_ratio(&best);
    let mut trace = vec![value];
    for iteration in 1..=settings.max_outer_iters {
        solve_surrogate(problem, &mut it)?;
        let r = it.matrix();
        let next = problem.min_ratio(&r);
        // The minorant is tight at the previous iterate, so a lower value can
        // only come from rounding in the inner solve: stop at the previous one.
        if next < value {
            trace.push(value);
            return Ok(finish(best, value, trace, iteration));
        }
        trace.push(next);
        let change = next - value;
        value = next;
        best = r;
        if change <= settings.sca_tol * value.abs().max(f64::MIN_POSITIVE) {
            return Ok(finish(best, value, trace, iteration));
        }
        it = Iterate::from_matrix(&best);
    }
    Err(SolverError::NoConvergence {
        iterations: settings.max_outer_iters,
    })
}

fn finish(r: CMat, value: f64, trace: Vec<f64>, iterations: usize) -> ScaSolution {
    let tr = trace_re(&r);
    ScaSolution {
        matrix: r.unscale(tr),
        value,
        trace,
        iterations,
    }
}
