//! The two-dimensional family of D matrices, the quadric of pure states, and
//! reconstruction of projectors from a D matrix.
//!
//! For `N = 2` with the first two fiducials taken as basis states, every D
//! matrix has the shape
//!
//! ```text
//!     1    0   1-a  1-b
//!     0    1    a    b
//!    1-a   a    1    c
//!    1-b   b    c    1
//! ```
//!
//! Writing `v = (r2 - r1, r3, r4)` the pure states satisfy `v^T A v = 1/2`,
//! and the surface is an ellipsoid exactly when `c_- < c < c_+`.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{GptError, Result};
use crate::frame::{canonical_labels, FiducialFrame, FiducialLabel, GramMatrix};
use crate::linalg::{c, outer, RMatrix, C64, LINALG_TOL};
use crate::state::RVector;

/// Tolerance under which an eigenvalue of `A` counts as zero.
pub const DEGENERATE_TOL: f64 = 1e-10;

/// Off-diagonal value between a basis fiducial and a fiducial of a subspace containing it.
pub const HALF: f64 = 0.5;
/// Off-diagonal value between fiducials of two distinct overlapping two-dimensional subspaces.
pub const QUARTER: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct D2Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl D2Params {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, value) in [("a", a), ("b", b), ("c", c)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GptError::ParameterOutOfRange { name, value });
            }
        }
        Ok(Self { a, b, c })
    }

    /// The spherical gauge `a = b = c = 1/2`.
    pub fn spherical() -> Self {
        Self {
            a: 0.5,
            b: 0.5,
            c: 0.5,
        }
    }

    /// Reads `(a, b, c)` off a matrix in the family.
    pub fn from_matrix(d: &RMatrix) -> Result<Self> {
        check_family(d)?;
        Self::new(d[(1, 2)], d[(1, 3)], d[(2, 3)])
    }
}

/// The template matrix without range checks, for scans that leave `[0, 1]`.
pub fn d2_template(a: f64, b: f64, c: f64) -> RMatrix {
    RMatrix::from_row_slice(
        4,
        4,
        &[
            1.0,
            0.0,
            1.0 - a,
            1.0 - b, //
            0.0,
            1.0,
            a,
            b, //
            1.0 - a,
            a,
            1.0,
            c, //
            1.0 - b,
            b,
            c,
            1.0,
        ],
    )
}

/// Assembles the 4x4 D matrix of the family.
pub fn d2_assemble(params: &D2Params) -> RMatrix {
    d2_template(params.a, params.b, params.c)
}

fn check_family(d: &RMatrix) -> Result<()> {
    if d.nrows() != 4 || d.ncols() != 4 {
        return Err(GptError::NotInFamily(format!(
            "expected 4x4, got {}x{}",
            d.nrows(),
            d.ncols()
        )));
    }
    let template = d2_template(d[(1, 2)], d[(1, 3)], d[(2, 3)]);
    let dev = crate::linalg::max_abs_diff(d, &template);
    if dev > crate::linalg::LINALG_TOL {
        return Err(GptError::NotInFamily(format!(
            "deviates from template by {dev:e}"
        )));
    }
    Ok(())
}

/// Roots `c_+- = 1 - a - b + 2ab +- 2 sqrt(ab(1-a)(1-b))` where `det D` vanishes.
pub fn c_bounds(a: f64, b: f64) -> (f64, f64) {
    let centre = 1.0 - a - b + 2.0 * a * b;
    let spread = 2.0 * (a * b * (1.0 - a) * (1.0 - b)).max(0.0).sqrt();
    (centre - spread, centre + spread)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochCoordinates {
    /// Normalization `mu = 2 v0 + v1 + v2 + v3`.
    pub mu: f64,
    /// Reduced vector `(r2 - r1, r3, r4)`.
    pub v: [f64; 3],
}

impl BlochCoordinates {
    pub fn vector(&self) -> Vector3<f64> {
        Vector3::from(self.v)
    }
}

pub fn bloch_coordinates(r: &RVector) -> Result<BlochCoordinates> {
    if r.k() != 4 {
        return Err(GptError::DimensionMismatch {
            expected: 4,
            found: r.k(),
        });
    }
    let r = r.values();
    let v0 = r[0];
    let v = [r[1] - r[0], r[2], r[3]];
    Ok(BlochCoordinates {
        mu: 2.0 * v0 + v.iter().sum::<f64>(),
        v,
    })
}

/// Quadratic form with `r^T D r' = v^T A v' + mu mu' / 2`.
pub fn a_matrix(params: &D2Params) -> Matrix3<f64> {
    let (a, b, c) = (params.a - 0.5, params.b - 0.5, params.c - 0.5);
    Matrix3::new(0.5, a, b, a, 0.5, c, b, c, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Ellipsoid,
    Hyperboloid,
    Degenerate,
    /// Three negative eigenvalues: `v^T A v = 1/2` has no real solutions.
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceClass {
    pub kind: SurfaceKind,
    /// Eigenvalues of `A`, ascending.
    pub eigenvalues: [f64; 3],
}

pub fn classify_surface(a: &Matrix3<f64>) -> SurfaceClass {
    let sym = (a + a.transpose()) * 0.5;
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    let eigenvalues = [eig[0], eig[1], eig[2]];
    let kind = if eigenvalues.iter().any(|e| e.abs() < DEGENERATE_TOL) {
        SurfaceKind::Degenerate
    } else {
        match eigenvalues.iter().filter(|&&e| e < 0.0).count() {
            0 => SurfaceKind::Ellipsoid,
            3 => SurfaceKind::Empty,
            _ => SurfaceKind::Hyperboloid,
        }
    };
    SurfaceClass { kind, eigenvalues }
}

/// Amplitudes of a projector pair `P3 = |alpha 1 + beta 2><..|`, `P4 = |gamma 1 + delta 2><..|`
/// reproducing a D matrix of the family, in the gauge `phi3 = 0`, `phi4 in [0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRecovery {
    pub phi3: f64,
    pub phi4: f64,
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
    pub delta: C64,
}

impl PhaseRecovery {
    /// The four projectors `|1><1|, |2><2|, P3, P4`.
    pub fn frame(&self) -> Result<FiducialFrame> {
        let ket = |x: C64, y: C64| nalgebra::DVector::from_vec(vec![x, y]);
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let projectors = vec![
            outer(&ket(one, zero)),
            outer(&ket(zero, one)),
            outer(&ket(self.alpha, self.beta)),
            outer(&ket(self.gamma, self.delta)),
        ];
        FiducialFrame::from_projectors(2, canonical_labels(2), projectors)
    }
}

/// Recovers amplitudes from a D matrix whose `c` lies strictly between the roots.
pub fn recover_phases(d: &RMatrix) -> Result<PhaseRecovery> {
    let params = D2Params::from_matrix(d)?;
    let D2Params { a, b, c: cc } = params;
    let centre = 1.0 - a - b + 2.0 * a * b;
    let spread = 2.0 * (a * b * (1.0 - a) * (1.0 - b)).sqrt();
    let cosine = if spread > 0.0 {
        (cc - centre) / spread
    } else {
        f64::NAN
    };
    // roots computed in floating point land within rounding of +-1
    if cosine.is_nan() || cosine.abs() >= 1.0 - LINALG_TOL {
        return Err(GptError::NoPhaseSolution { cosine });
    }
    let phi3 = 0.0;
    let phi4 = phi3 + cosine.acos();
    Ok(PhaseRecovery {
        phi3,
        phi4,
        alpha: c((1.0 - a).sqrt(), 0.0),
        beta: C64::from_polar(a.sqrt(), phi3),
        gamma: c((1.0 - b).sqrt(), 0.0),
        delta: C64::from_polar(b.sqrt(), phi4),
    })
}

fn general_entry(x: FiducialLabel, y: FiducialLabel) -> f64 {
    use FiducialLabel::*;
    if x == y {
        return 1.0;
    }
    match (x, y) {
        (Basis(_), Basis(_)) => 0.0,
        (Basis(k), X(m, n) | Y(m, n)) | (X(m, n) | Y(m, n), Basis(k)) => {
            if k == m || k == n {
                HALF
            } else {
                0.0
            }
        }
        (X(m1, n1) | Y(m1, n1), X(m2, n2) | Y(m2, n2)) => {
            if (m1, n1) == (m2, n2) {
                HALF
            } else if m1 == m2 || m1 == n2 || n1 == m2 || n1 == n2 {
                QUARTER
            } else {
                0.0
            }
        }
    }
}

/// D matrix for dimension `n` assembled from the subspace rules alone, in canonical order.
pub fn build_general_d(n: usize) -> Result<GramMatrix> {
    if n == 0 {
        return Err(GptError::InvalidDimension(n));
    }
    let labels = canonical_labels(n);
    let k = labels.len();
    let d = RMatrix::from_fn(k, k, |i, j| general_entry(labels[i], labels[j]));
    GramMatrix::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::gram_matrix;

    fn dhalfs() -> RMatrix {
        RMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.5, 0.5, 0.0, 1.0, 0.5, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 0.5, 1.0,
            ],
        )
    }

    #[test]
    fn spherical_params_give_dhalfs() {
        assert_eq!(d2_assemble(&D2Params::spherical()), dhalfs());
    }

    #[test]
    fn template_substitution() {
        let d = d2_assemble(&D2Params::new(1.0, 1.0, 0.3).unwrap());
        assert_eq!(
            d.row(2).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 1.0, 1.0, 0.3]
        );
    }

    #[test]
    fn out_of_range_params() {
        assert!(matches!(
            D2Params::new(1.5, 0.5, 0.5),
            Err(GptError::ParameterOutOfRange { name: "a", .. })
        ));
        assert!(D2Params::new(0.5, 0.5, -0.1).is_err());
    }

    #[test]
    fn determinant_vanishes_at_roots() {
        for &(a, b) in &[(0.5, 0.5), (0.2, 0.7), (0.9, 0.35)] {
            let (lo, hi) = c_bounds(a, b);
            assert!(d2_template(a, b, lo).determinant().abs() < 1e-12);
            assert!(d2_template(a, b, hi).determinant().abs() < 1e-12);
        }
    }

    #[test]
    fn c_bounds_examples() {
        assert_eq!(c_bounds(0.5, 0.5), (0.0, 1.0));
        assert_eq!(c_bounds(0.0, 0.0), (1.0, 1.0));
        let (lo, hi) = c_bounds(0.5, 0.5);
        assert!(lo < 0.5 && 0.5 < hi);
    }

    #[test]
    fn bloch_coordinate_examples() {
        let mixed = bloch_coordinates(&RVector::state(&[0.5, 0.5, 0.0, 0.0])).unwrap();
        assert_eq!(mixed.v, [0.0, 0.0, 0.0]);
        assert_eq!(mixed.mu, 1.0);
        let e1 = bloch_coordinates(&RVector::state(&[1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(e1.v, [-1.0, 0.0, 0.0]);
        assert_eq!(e1.mu, 1.0);
        let zero = bloch_coordinates(&RVector::state(&[0.0; 4])).unwrap();
        assert_eq!((zero.mu, zero.v), (0.0, [0.0; 3]));
        assert!(bloch_coordinates(&RVector::state(&[1.0; 9])).is_err());
    }

    #[test]
    fn a_matrix_examples() {
        let a = a_matrix(&D2Params::spherical());
        assert_eq!(a, Matrix3::identity() * 0.5);
        let v = Vector3::new(-1.0, 0.0, 0.0);
        assert_eq!(v.dot(&(a * v)), 0.5);

        let a = a_matrix(&D2Params::new(1.0, 0.5, 0.5).unwrap());
        assert_eq!(a[(0, 1)], 0.5);
        // c_- = c_+ = 1/2 here, so c sits on the root and det A vanishes
        assert_eq!(c_bounds(1.0, 0.5), (0.5, 0.5));
        assert!(a.determinant().abs() < 1e-15);
        assert_eq!(classify_surface(&a).kind, SurfaceKind::Degenerate);
    }

    #[test]
    fn bilinear_form_matches_a_matrix() {
        let params = D2Params::new(0.3, 0.6, 0.45).unwrap();
        let d = d2_assemble(&params);
        let a = a_matrix(&params);
        let r = nalgebra::DVector::from_vec(vec![0.2, -0.1, 0.7, 0.3]);
        let s = nalgebra::DVector::from_vec(vec![-0.4, 0.5, 0.1, 0.9]);
        let br = bloch_coordinates(&RVector::state(r.as_slice())).unwrap();
        let bs = bloch_coordinates(&RVector::state(s.as_slice())).unwrap();
        let lhs = r.dot(&(&d * &s));
        let rhs = br.vector().dot(&(a * bs.vector())) + br.mu * bs.mu / 2.0;
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            classify_surface(&(Matrix3::identity() * 0.5)).kind,
            SurfaceKind::Ellipsoid
        );
        assert_eq!(
            classify_surface(&Matrix3::from_diagonal(&Vector3::new(0.5, 0.5, -0.5))).kind,
            SurfaceKind::Hyperboloid
        );
        assert_eq!(
            classify_surface(&(Matrix3::identity() * -1.0)).kind,
            SurfaceKind::Empty
        );
        let boundary = a_matrix(&D2Params::new(0.5, 0.5, 1.0).unwrap());
        assert_eq!(classify_surface(&boundary).kind, SurfaceKind::Degenerate);
        let above = a_matrix(&D2Params {
            a: 0.5,
            b: 0.5,
            c: 1.01,
        });
        assert_eq!(classify_surface(&above).kind, SurfaceKind::Hyperboloid);
    }

    #[test]
    fn classification_scan_over_c() {
        // a = b = 1/2: ellipsoid for 0 < c < 1, degenerate at the ends
        for i in 1..1000 {
            let c = i as f64 / 1000.0;
            let class = classify_surface(&a_matrix(&D2Params::new(0.5, 0.5, c).unwrap()));
            assert_eq!(class.kind, SurfaceKind::Ellipsoid, "c = {c}");
        }
        assert_eq!(
            classify_surface(&a_matrix(&D2Params::new(0.5, 0.5, 0.0).unwrap())).kind,
            SurfaceKind::Degenerate
        );
    }

    #[test]
    fn recover_spherical_gauge() {
        let rec = recover_phases(&dhalfs()).unwrap();
        assert_eq!(rec.phi3, 0.0);
        assert!((rec.phi4 - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let frame = rec.frame().unwrap();
        let canonical = crate::frame::build_canonical_frame(2).unwrap();
        for k in 0..4 {
            assert!(
                crate::linalg::max_abs_diff_c(frame.projector(k), canonical.projector(k)) < 1e-15
            );
        }
    }

    #[test]
    fn recover_rejects_boundary() {
        let (_, hi) = c_bounds(0.3, 0.6);
        let err = recover_phases(&d2_template(0.3, 0.6, hi));
        assert!(matches!(err, Err(GptError::NoPhaseSolution { .. })));
        let err = recover_phases(&d2_template(0.0, 0.0, 1.0));
        assert!(matches!(err, Err(GptError::NoPhaseSolution { .. })));
        assert!(matches!(
            recover_phases(&RMatrix::identity(4, 4)),
            Err(GptError::NotInFamily(_))
        ));
    }

    #[test]
    fn recovered_frame_reproduces_d() {
        let d = d2_template(0.3, 0.6, 0.55);
        let frame = recover_phases(&d).unwrap().frame().unwrap();
        let g = gram_matrix(&frame).unwrap();
        assert!(crate::linalg::max_abs_diff(g.matrix(), &d) < 1e-12);
    }

    #[test]
    fn general_d_small_cases() {
        assert_eq!(build_general_d(2).unwrap().matrix(), &dhalfs());
        let d3 = build_general_d(3).unwrap();
        let frame = crate::frame::build_canonical_frame(3).unwrap();
        let i12x = frame.index_of(FiducialLabel::X(0, 1)).unwrap();
        let i13x = frame.index_of(FiducialLabel::X(0, 2)).unwrap();
        assert_eq!(d3.get(i12x, i13x), 0.25);
        assert!(build_general_d(0).is_err());
    }
}
