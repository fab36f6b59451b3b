//! Small dense linear-algebra helpers over `nalgebra` shared by every module.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;
pub type RVec = DVector<f64>;

/// Tolerance for exact algebraic identities (hermiticity, idempotence, symmetry).
pub const LINALG_TOL: f64 = 1e-12;
/// Tolerance on purity tests `r^T D r = 1`.
pub const PURITY_TOL: f64 = 1e-9;
/// Eigenvalue slack for positive-semidefiniteness.
pub const PSD_TOL: f64 = 1e-10;
/// Relative singular-value threshold for rank and invertibility decisions.
pub const SINGULAR_TOL: f64 = 1e-9;
/// Condition-number cutoff above which a transform is treated as singular.
pub const MAX_CONDITION: f64 = 1e9;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// `|psi><psi|`
pub fn outer(psi: &DVector<C64>) -> CMatrix {
    psi * psi.adjoint()
}

/// Projector onto the `k`-th standard basis vector (0-indexed).
pub fn basis_projector(n: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(k, k)] = c(1.0, 0.0);
    m
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = c(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Largest entry of `|M - M^dagger|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    (m - m.adjoint())
        .iter()
        .fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff_c(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &RMatrix, b: &RMatrix) -> f64 {
    (a - b).iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_diff_vec(a: &RVec, b: &RVec) -> f64 {
    (a - b).iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    eig
}

pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Eigenvector of the largest eigenvalue of a Hermitian matrix.
pub fn dominant_eigenvector(m: &CMatrix) -> (f64, DVector<C64>) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .expect("non-empty matrix");
    (val, eig.eigenvectors.column(idx).into_owned())
}

/// Numerical rank using singular values relative to the largest one.
pub fn rank(m: &RMatrix, rel_tol: f64) -> usize {
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// 2-norm condition number; infinite for an exactly singular matrix.
pub fn condition_number(m: &RMatrix) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0_f64, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Partial transpose on the second tensor factor of an `na*nb` operator.
pub fn partial_transpose_b(rho: &CMatrix, na: usize, nb: usize) -> CMatrix {
    let mut out = CMatrix::zeros(na * nb, na * nb);
    for i in 0..na {
        for j in 0..nb {
            for k in 0..na {
                for l in 0..nb {
                    out[(i * nb + l, k * nb + j)] = rho[(i * nb + j, k * nb + l)];
                }
            }
        }
    }
    out
}

/// Maximum deviation of `U^dagger U` from the identity.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs_diff_c(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

/// Completes `first` to an orthonormal basis by Gram-Schmidt over the standard
/// basis in index order, returning the unitary whose first column is `first`.
pub fn complete_basis(first: &DVector<C64>) -> CMatrix {
    let n = first.len();
    let mut cols: Vec<DVector<C64>> = vec![first.normalize()];
    for k in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = DVector::<C64>::zeros(n);
        v[k] = c(1.0, 0.0);
        for q in &cols {
            let proj = q.dotc(&v);
            v -= q * proj;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v / c(norm, 0.0));
        }
    }
    CMatrix::from_columns(&cols)
}

/// Spectral data of a unitary: `U = Q diag(e^{i theta}) Q^dagger` with
/// `theta` in `(-pi, pi]` (the principal logarithm).
pub struct UnitaryLog {
    q: CMatrix,
    angles: Vec<f64>,
}

impl UnitaryLog {
    pub fn new(u: &CMatrix) -> Self {
        let (q, t) = u.clone().schur().unpack();
        let angles = (0..t.nrows()).map(|i| t[(i, i)].arg()).collect();
        Self { q, angles }
    }

    /// `exp(t log U)`.
    pub fn power(&self, t: f64) -> CMatrix {
        let n = self.angles.len();
        let mut diag = CMatrix::zeros(n, n);
        for (i, theta) in self.angles.iter().enumerate() {
            diag[(i, i)] = Complex::from_polar(1.0, t * theta);
        }
        &self.q * diag * self.q.adjoint()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}
