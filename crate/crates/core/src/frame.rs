//! Fiducial projector frames, their Gram ("D") matrices and signature vectors.
//!
//! The canonical frame for dimension `N` holds `N^2` rank-one projectors in a
//! fixed order: the `N` basis projectors `|n><n|`, then for every pair `m < n`
//! (lexicographic) the projector onto `(|m> + |n>)/sqrt 2` followed by the
//! projector onto `(|m> + i|n>)/sqrt 2`. Any state `rho` is fixed by the `N^2`
//! probabilities `tr(P_k rho)`, and the Gram matrix `D_ij = tr(P_i P_j)` links
//! that probability vector to the expansion coefficients of `rho` in the frame.

use std::fmt;

use nalgebra::{Dyn, LU};

use crate::error::{GptError, Result};
use crate::linalg::{
    c, hermitian_deviation, max_abs_diff_c, trace_product, CMatrix, RMatrix, RVec, LINALG_TOL,
    SINGULAR_TOL,
};

/// Which one-dimensional subspace or two-dimensional subspace a fiducial projector belongs to.
/// Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiducialLabel {
    Basis(usize),
    /// Real superposition in the `(m, n)` subspace.
    X(usize, usize),
    /// Superposition with relative phase in the `(m, n)` subspace.
    Y(usize, usize),
}

impl FiducialLabel {
    /// Basis indices the projector has support on.
    pub fn support(&self) -> Vec<usize> {
        match *self {
            FiducialLabel::Basis(k) => vec![k],
            FiducialLabel::X(m, n) | FiducialLabel::Y(m, n) => vec![m, n],
        }
    }
}

impl fmt::Display for FiducialLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FiducialLabel::Basis(k) => write!(f, "{}", k + 1),
            FiducialLabel::X(m, n) => write!(f, "{}{}x", m + 1, n + 1),
            FiducialLabel::Y(m, n) => write!(f, "{}{}y", m + 1, n + 1),
        }
    }
}

/// Canonical ordering of fiducial labels for dimension `n`.
pub fn canonical_labels(n: usize) -> Vec<FiducialLabel> {
    let mut labels: Vec<FiducialLabel> = (0..n).map(FiducialLabel::Basis).collect();
    for m in 0..n {
        for k in (m + 1)..n {
            labels.push(FiducialLabel::X(m, k));
            labels.push(FiducialLabel::Y(m, k));
        }
    }
    labels
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    /// The `N^2` canonical projectors.
    Canonical,
    /// Only the `N` basis projectors (`K = N`), spanning the diagonal operators.
    Classical,
    /// Projectors supplied by the caller (e.g. a reconstructed N=2 frame).
    Custom,
}

/// Ordered set of Hermitian rank-one projectors.
#[derive(Debug, Clone)]
pub struct FiducialFrame {
    n: usize,
    kind: FrameKind,
    labels: Vec<FiducialLabel>,
    projectors: Vec<CMatrix>,
}

/// Builds the canonical `N^2`-element frame.
pub fn build_canonical_frame(n: usize) -> Result<FiducialFrame> {
    if n == 0 {
        return Err(GptError::InvalidDimension(n));
    }
    let labels = canonical_labels(n);
    // entries written out exactly rather than through |psi><psi|, so that every
    // entry is 0, 1, 1/2 or +-i/2 with no rounding
    let projectors = labels
        .iter()
        .map(|label| {
            let mut p = CMatrix::zeros(n, n);
            match *label {
                FiducialLabel::Basis(k) => p[(k, k)] = c(1.0, 0.0),
                FiducialLabel::X(m, k) => {
                    for (i, j) in [(m, m), (k, k), (m, k), (k, m)] {
                        p[(i, j)] = c(0.5, 0.0);
                    }
                }
                FiducialLabel::Y(m, k) => {
                    p[(m, m)] = c(0.5, 0.0);
                    p[(k, k)] = c(0.5, 0.0);
                    p[(m, k)] = c(0.0, -0.5);
                    p[(k, m)] = c(0.0, 0.5);
                }
            }
            p
        })
        .collect();
    let frame = FiducialFrame {
        n,
        kind: FrameKind::Canonical,
        labels,
        projectors,
    };
    frame.validate()?;
    Ok(frame)
}

/// The `N` basis projectors alone. Its Gram matrix is the identity.
pub fn build_classical_frame(n: usize) -> Result<FiducialFrame> {
    if n == 0 {
        return Err(GptError::InvalidDimension(n));
    }
    let labels: Vec<_> = (0..n).map(FiducialLabel::Basis).collect();
    let projectors = (0..n)
        .map(|k| crate::linalg::basis_projector(n, k))
        .collect();
    Ok(FiducialFrame {
        n,
        kind: FrameKind::Classical,
        labels,
        projectors,
    })
}

impl FiducialFrame {
    /// Wraps caller-supplied projectors, checking every frame invariant.
    pub fn from_projectors(
        n: usize,
        labels: Vec<FiducialLabel>,
        projectors: Vec<CMatrix>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(GptError::InvalidDimension(n));
        }
        if labels.len() != projectors.len() {
            return Err(GptError::DimensionMismatch {
                expected: projectors.len(),
                found: labels.len(),
            });
        }
        let frame = FiducialFrame {
            n,
            kind: FrameKind::Custom,
            labels,
            projectors,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Number of fiducial elements `K`.
    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn kind(&self) -> FrameKind {
        self.kind
    }

    pub fn labels(&self) -> &[FiducialLabel] {
        &self.labels
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn projector(&self, k: usize) -> &CMatrix {
        &self.projectors[k]
    }

    /// Position of a label in the frame ordering.
    pub fn index_of(&self, label: FiducialLabel) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }

    fn validate(&self) -> Result<()> {
        for (index, p) in self.projectors.iter().enumerate() {
            if p.nrows() != self.n || p.ncols() != self.n {
                return Err(GptError::DimensionMismatch {
                    expected: self.n,
                    found: p.nrows(),
                });
            }
            let herm = hermitian_deviation(p);
            if herm > LINALG_TOL {
                return Err(GptError::InvalidProjector {
                    index,
                    reason: format!("not Hermitian ({herm:e})"),
                });
            }
            let idem = max_abs_diff_c(&(p * p), p);
            if idem > LINALG_TOL {
                return Err(GptError::InvalidProjector {
                    index,
                    reason: format!("not idempotent ({idem:e})"),
                });
            }
            let tr = p.trace();
            if (tr.re - 1.0).abs() > LINALG_TOL || tr.im.abs() > LINALG_TOL {
                return Err(GptError::InvalidProjector {
                    index,
                    reason: format!("trace {tr} is not 1"),
                });
            }
        }
        let sv = self.flattening().singular_values();
        let max = sv.iter().copied().fold(0.0_f64, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if sv.len() < self.len() || min <= SINGULAR_TOL * max {
            return Err(GptError::DegenerateFrame {
                min_singular: if sv.len() < self.len() { 0.0 } else { min },
            });
        }
        Ok(())
    }

    /// `K x 2N^2` real matrix whose rows are the real and imaginary parts of each projector.
    pub fn flattening(&self) -> RMatrix {
        let n2 = self.n * self.n;
        RMatrix::from_fn(self.len(), 2 * n2, |k, j| {
            let z = self.projectors[k][(j % n2 / self.n, j % self.n)];
            if j < n2 {
                z.re
            } else {
                z.im
            }
        })
    }

    /// `tr(P_k A)` for every frame element.
    pub fn traces_against(&self, op: &CMatrix) -> Result<RVec> {
        self.check_operator(op)?;
        Ok(RVec::from_iterator(
            self.len(),
            self.projectors.iter().map(|p| trace_product(p, op).re),
        ))
    }

    /// `sum_k coeffs_k P_k`.
    pub fn combine(&self, coeffs: &RVec) -> Result<CMatrix> {
        if coeffs.len() != self.len() {
            return Err(GptError::DimensionMismatch {
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        let mut acc = CMatrix::zeros(self.n, self.n);
        for (p, &w) in self.projectors.iter().zip(coeffs.iter()) {
            acc += p * c(w, 0.0);
        }
        Ok(acc)
    }

    pub(crate) fn check_operator(&self, op: &CMatrix) -> Result<()> {
        if op.nrows() != self.n || op.ncols() != self.n {
            return Err(GptError::DimensionMismatch {
                expected: self.n,
                found: op.nrows(),
            });
        }
        Ok(())
    }
}

/// Real symmetric invertible Gram matrix of a frame, with a cached LU factorization.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    n: usize,
    matrix: RMatrix,
    lu: LU<f64, Dyn, Dyn>,
}

impl PartialEq for GramMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.matrix == other.matrix
    }
}

impl GramMatrix {
    /// Validates symmetry and invertibility of a candidate D matrix.
    pub fn new(n: usize, matrix: RMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(GptError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let asym = crate::linalg::max_abs_diff(&matrix, &matrix.transpose());
        if asym > LINALG_TOL {
            return Err(GptError::NotInFamily(format!(
                "D is not symmetric ({asym:e})"
            )));
        }
        let min_sv = matrix
            .singular_values()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_sv.is_nan() || min_sv <= SINGULAR_TOL {
            return Err(GptError::DegenerateFrame {
                min_singular: min_sv,
            });
        }
        let lu = matrix.clone().lu();
        Ok(Self { n, matrix, lu })
    }

    /// Identity D of the classical theory with `n` basis states.
    pub fn identity(n: usize) -> Self {
        Self::new(n, RMatrix::identity(n, n)).expect("identity is invertible")
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Solves `D x = b`.
    pub fn solve(&self, b: &RVec) -> Result<RVec> {
        if b.len() != self.k() {
            return Err(GptError::DimensionMismatch {
                expected: self.k(),
                found: b.len(),
            });
        }
        self.lu.solve(b).ok_or(GptError::Singular {
            condition: f64::INFINITY,
        })
    }

    /// Solves `D X = B` column by column.
    pub fn solve_matrix(&self, b: &RMatrix) -> Result<RMatrix> {
        if b.nrows() != self.k() {
            return Err(GptError::DimensionMismatch {
                expected: self.k(),
                found: b.nrows(),
            });
        }
        self.lu.solve(b).ok_or(GptError::Singular {
            condition: f64::INFINITY,
        })
    }

    /// `x^T D y`.
    pub fn bilinear(&self, x: &RVec, y: &RVec) -> f64 {
        x.dot(&(&self.matrix * y))
    }

    /// Principal submatrix on the given index set (in the given order).
    pub fn submatrix(&self, indices: &[usize]) -> RMatrix {
        RMatrix::from_fn(indices.len(), indices.len(), |i, j| {
            self.matrix[(indices[i], indices[j])]
        })
    }
}

/// `D_ij = tr(P_i P_j)`; fails when the frame is linearly dependent.
pub fn gram_matrix(frame: &FiducialFrame) -> Result<GramMatrix> {
    let k = frame.len();
    let mut d = RMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let z = trace_product(frame.projector(i), frame.projector(j));
            if z.im.abs() >= LINALG_TOL {
                return Err(GptError::InvalidProjector {
                    index: i,
                    reason: format!("tr(P_{i} P_{j}) has imaginary part {:e}", z.im),
                });
            }
            d[(i, j)] = z.re;
            d[(j, i)] = z.re;
        }
    }
    GramMatrix::new(frame.dimension(), d)
}

/// Counts `x_j` of extra degrees of freedom per `j`-dimensional subspace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature(pub Vec<u64>);

impl Signature {
    /// Signature with trailing zeros removed.
    pub fn trimmed(&self) -> Vec<u64> {
        let mut v = self.0.clone();
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    /// `K(N) = sum_j C(N, j) x_j` for `N = 1..=n_max`.
    pub fn k_table(&self, n_max: usize) -> Vec<u64> {
        (1..=n_max as u64)
            .map(|n| {
                self.0
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| binomial(n, j as u64 + 1) * x)
                    .sum()
            })
            .collect()
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Solves the unit-triangular system `K(N) = sum_{j<=N} C(N, j) x_j` for the signature.
/// `k_table[i]` holds `K(i + 1)`.
pub fn signature_from_table(k_table: &[u64]) -> Result<Signature> {
    if k_table.is_empty() {
        return Err(GptError::Empty("K table"));
    }
    let mut x: Vec<u64> = Vec::with_capacity(k_table.len());
    for (idx, &k) in k_table.iter().enumerate() {
        let n = idx as u64 + 1;
        let lower: i128 = x
            .iter()
            .enumerate()
            .map(|(j, &xj)| binomial(n, j as u64 + 1) as i128 * xj as i128)
            .sum();
        let value = k as i128 - lower;
        if value < 0 {
            return Err(GptError::NoSignature {
                index: idx + 1,
                value,
            });
        }
        x.push(value as u64);
    }
    Ok(Signature(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rank;

    #[test]
    fn dimension_zero_is_rejected() {
        assert!(matches!(
            build_canonical_frame(0),
            Err(GptError::InvalidDimension(0))
        ));
        assert!(matches!(
            build_classical_frame(0),
            Err(GptError::InvalidDimension(0))
        ));
    }

    #[test]
    fn one_dimensional_frame_is_identity() {
        let f = build_canonical_frame(1).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.projector(0)[(0, 0)], c(1.0, 0.0));
        assert_eq!(gram_matrix(&f).unwrap().matrix(), &RMatrix::identity(1, 1));
    }

    #[test]
    fn qubit_frame_superposition_projectors() {
        let f = build_canonical_frame(2).unwrap();
        let x =
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]);
        let y =
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.5, 0.0)]);
        assert!(max_abs_diff_c(f.projector(2), &x) < 1e-15);
        assert!(max_abs_diff_c(f.projector(3), &y) < 1e-15);
    }

    #[test]
    fn qutrit_frame_has_full_rank() {
        let f = build_canonical_frame(3).unwrap();
        assert_eq!(f.len(), 9);
        assert_eq!(rank(&f.flattening(), SINGULAR_TOL), 9);
        let names: Vec<String> = f.labels().iter().map(|l| l.to_string()).collect();
        assert_eq!(
            names,
            ["1", "2", "3", "12x", "12y", "13x", "13y", "23x", "23y"]
        );
    }

    #[test]
    fn classical_subframe_gram_is_identity() {
        for n in 1..5 {
            let f = build_classical_frame(n).unwrap();
            assert_eq!(gram_matrix(&f).unwrap().matrix(), &RMatrix::identity(n, n));
        }
    }

    #[test]
    fn dependent_projectors_are_rejected() {
        let p = crate::linalg::basis_projector(2, 0);
        let err = FiducialFrame::from_projectors(
            2,
            vec![FiducialLabel::Basis(0), FiducialLabel::Basis(0)],
            vec![p.clone(), p],
        );
        assert!(matches!(err, Err(GptError::DegenerateFrame { .. })));
    }

    #[test]
    fn non_projector_is_rejected() {
        let m = CMatrix::identity(2, 2);
        let err = FiducialFrame::from_projectors(2, vec![FiducialLabel::Basis(0)], vec![m]);
        assert!(matches!(err, Err(GptError::InvalidProjector { .. })));
    }

    #[test]
    fn known_signatures() {
        let classical: Vec<u64> = (1..=6).collect();
        let quantum: Vec<u64> = (1..=6).map(|n| n * n).collect();
        let reals: Vec<u64> = (1..=6).map(|n| n * (n + 1) / 2).collect();
        let quaternions: Vec<u64> = (1..=6).map(|n| n * (2 * n - 1)).collect();
        assert_eq!(signature_from_table(&classical).unwrap().trimmed(), vec![1]);
        assert_eq!(
            signature_from_table(&quantum).unwrap().trimmed(),
            vec![1, 2]
        );
        assert_eq!(signature_from_table(&reals).unwrap().trimmed(), vec![1, 1]);
        assert_eq!(
            signature_from_table(&quaternions).unwrap().trimmed(),
            vec![1, 4]
        );
    }

    #[test]
    fn inconsistent_table_has_no_signature() {
        assert!(matches!(
            signature_from_table(&[1, 1]),
            Err(GptError::NoSignature { index: 2, .. })
        ));
        assert!(signature_from_table(&[]).is_err());
    }
}
