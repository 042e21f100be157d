//! Small dense complex linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigen {
    pub fn top(&self) -> (f64, CVec) {
        (self.values[0], self.vectors.column(0).into_owned())
    }

    pub fn bottom(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// Eigendecomposition of a Hermitian matrix (only the Hermitian part is used).
pub fn hermitian_eigen(m: &CMat) -> Eigen {
    let n = m.nrows();
    let sym = hermitian_part(m);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Eigen { values, vectors }
}

pub fn top_eigenpair(m: &CMat) -> (f64, CVec) {
    hermitian_eigen(m).top()
}

pub fn lambda_max(m: &CMat) -> f64 {
    hermitian_eigen(m).values[0]
}

pub fn lambda_min(m: &CMat) -> f64 {
    hermitian_eigen(m).bottom()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `Re tr(A B)`, exact for Hermitian `A`, `B`.
pub fn trace_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    acc
}

/// `Re(v^H A v)`.
pub fn quad_form(a: &CMat, v: &CVec) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for j in 0..n {
        let mut col = Complex64::new(0.0, 0.0);
        for i in 0..n {
            col += v[i].conj() * a[(i, j)];
        }
        acc += (col * v[j]).re;
    }
    acc
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn normalized(v: &CVec) -> CVec {
    let n = v.norm();
    v.unscale(n)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    let n = m.nrows();
    if m.ncols() != n {
        return false;
    }
    (0..n).all(|i| (0..n).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol))
}

pub fn trace_re(m: &CMat) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// Lower Cholesky factor if `m` is Hermitian positive definite.
pub fn cholesky(m: &CMat) -> Option<CMat> {
    let l = nalgebra::Cholesky::new(hermitian_part(m))?.unpack();
    let ok = (0..l.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re.is_finite() && d.re > 0.0 && d.im.abs() <= 1e-12 * d.re
    });
    ok.then_some(l)
}

/// Largest `lambda` with `A u = lambda B u`, for `B` positive definite.
pub fn generalized_lambda_max(a: &CMat, b: &CMat) -> Option<(f64, CVec)> {
    let l = cholesky(b)?;
    let l_inv = l.clone().try_inverse()?;
    let reduced = &l_inv * a * l_inv.adjoint();
    let (value, y) = top_eigenpair(&reduced);
    let u = l_inv.adjoint() * y;
    Some((value, normalized(&u)))
}

/// Identity scaled to unit trace.
pub fn unit_trace_identity(n: usize) -> CMat {
    CMat::identity(n, n).unscale(n as f64)
}
