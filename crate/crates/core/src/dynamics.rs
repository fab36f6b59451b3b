//! Transformation matrices `Z` acting on p-vectors and their operator-level
//! counterparts.
//!
//! A superoperator `$` induces `Z = tr(P $(P)^T) D^{-1}` so that
//! `tr(P $(rho)) = Z tr(P rho)` for every `rho`. Superoperator matrices act on
//! column-major vectorized operators: `vec(X)[i + N j] = X[i, j]`.

use serde::Serialize;

use crate::error::{GptError, Result};
use crate::frame::{FiducialFrame, GramMatrix};
use crate::linalg::{
    c, complete_basis, condition_number, dominant_eigenvector, hermitian_eigenvalues,
    max_abs_diff_c, trace_product, unitarity_deviation, CMatrix, RMatrix, RVec, UnitaryLog,
    MAX_CONDITION, PSD_TOL, PURITY_TOL,
};
use crate::state::{density_from_r, purity_deviation, PVector, RVector, Theory, TheoryKind};

/// Operators `M_l` of a superoperator `rho -> sum_l M_l rho M_l^dagger`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    n: usize,
    ops: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or(GptError::Empty("Kraus set"))?;
        let n = first.nrows();
        if n == 0 {
            return Err(GptError::InvalidDimension(0));
        }
        for m in &ops {
            if m.nrows() != n || m.ncols() != n {
                return Err(GptError::DimensionMismatch {
                    expected: n,
                    found: m.ncols().max(m.nrows()),
                });
            }
        }
        Ok(Self { n, ops })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            ops: vec![CMatrix::identity(n, n)],
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// `sum_l M_l^dagger M_l`
    pub fn effect_sum(&self) -> CMatrix {
        self.ops
            .iter()
            .fold(CMatrix::zeros(self.n, self.n), |acc, m| {
                acc + m.adjoint() * m
            })
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.ops
            .iter()
            .fold(CMatrix::zeros(self.n, self.n), |acc, m| {
                acc + m * rho * m.adjoint()
            })
    }

    /// `other` after `self`.
    pub fn then(&self, other: &KrausSet) -> Result<KrausSet> {
        if self.n != other.n {
            return Err(GptError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let ops = other
            .ops
            .iter()
            .flat_map(|b| self.ops.iter().map(move |a| b * a))
            .collect();
        KrausSet::new(ops)
    }

    /// Column-major superoperator matrix `sum_l conj(M_l) (x) M_l`.
    pub fn superoperator_matrix(&self) -> CMatrix {
        let n2 = self.n * self.n;
        self.ops.iter().fold(CMatrix::zeros(n2, n2), |acc, m| {
            acc + m.map(|z| z.conj()).kronecker(m)
        })
    }

    /// Largest deviation of `sum M^dagger M` from the identity.
    pub fn completeness_deviation(&self) -> f64 {
        max_abs_diff_c(&self.effect_sum(), &CMatrix::identity(self.n, self.n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    FromUnitary,
    FromKraus,
    Raw,
}

/// Real `K x K` matrix acting on p-vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformMatrix {
    n: usize,
    z: RMatrix,
    provenance: Provenance,
}

impl TransformMatrix {
    pub fn new(n: usize, z: RMatrix, provenance: Provenance) -> Result<Self> {
        if !z.is_square() {
            return Err(GptError::DimensionMismatch {
                expected: z.nrows(),
                found: z.ncols(),
            });
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(GptError::MalformedSuperoperator(
                "non-finite entry in Z".into(),
            ));
        }
        Ok(Self { n, z, provenance })
    }

    pub fn identity(n: usize, k: usize) -> Self {
        Self {
            n,
            z: RMatrix::identity(k, k),
            provenance: Provenance::Raw,
        }
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.z
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.z.nrows()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &TransformMatrix) -> Result<TransformMatrix> {
        if self.k() != first.k() {
            return Err(GptError::DimensionMismatch {
                expected: self.k(),
                found: first.k(),
            });
        }
        Ok(Self {
            n: self.n,
            z: &self.z * &first.z,
            provenance: Provenance::Raw,
        })
    }

    pub fn sum<'a>(
        items: impl IntoIterator<Item = &'a TransformMatrix>,
    ) -> Result<TransformMatrix> {
        let mut iter = items.into_iter();
        let first = iter.next().ok_or(GptError::Empty("transform list"))?;
        let mut z = first.z.clone();
        for t in iter {
            if t.k() != first.k() {
                return Err(GptError::DimensionMismatch {
                    expected: first.k(),
                    found: t.k(),
                });
            }
            z += &t.z;
        }
        Ok(Self {
            n: first.n,
            z,
            provenance: Provenance::Raw,
        })
    }
}

/// `Z = tr(P map(P)^T) D^{-1}` for any linear map on operators.
pub fn z_from_map<F>(map: F, frame: &FiducialFrame, d: &GramMatrix) -> Result<RMatrix>
where
    F: Fn(&CMatrix) -> CMatrix,
{
    let k = frame.len();
    let images: Vec<CMatrix> = frame.projectors().iter().map(&map).collect();
    let m = RMatrix::from_fn(k, k, |i, j| {
        trace_product(frame.projector(i), &images[j]).re
    });
    // Z D = M with D symmetric, so Z^T = D^{-1} M^T
    Ok(d.solve_matrix(&m.transpose())?.transpose())
}

pub fn z_from_kraus(
    kraus: &KrausSet,
    frame: &FiducialFrame,
    d: &GramMatrix,
) -> Result<TransformMatrix> {
    if kraus.dimension() != frame.dimension() {
        return Err(GptError::DimensionMismatch {
            expected: frame.dimension(),
            found: kraus.dimension(),
        });
    }
    let z = z_from_map(|x| kraus.apply(x), frame, d)?;
    TransformMatrix::new(frame.dimension(), z, Provenance::FromKraus)
}

pub fn z_from_unitary(
    u: &CMatrix,
    frame: &FiducialFrame,
    d: &GramMatrix,
) -> Result<TransformMatrix> {
    let deviation = unitarity_deviation(u);
    if deviation > 1e-10 {
        return Err(GptError::NotUnitary { deviation });
    }
    let kraus = KrausSet::new(vec![u.clone()])?;
    let mut t = z_from_kraus(&kraus, frame, d)?;
    t.provenance = Provenance::FromUnitary;
    Ok(t)
}

/// `Z` of a column-major superoperator matrix.
pub fn z_from_superoperator(
    s: &Superoperator,
    frame: &FiducialFrame,
    d: &GramMatrix,
) -> Result<TransformMatrix> {
    s.check()?;
    if s.dimension() != frame.dimension() {
        return Err(GptError::DimensionMismatch {
            expected: frame.dimension(),
            found: s.dimension(),
        });
    }
    let z = z_from_map(|x| s.apply(x), frame, d)?;
    TransformMatrix::new(frame.dimension(), z, Provenance::Raw)
}

/// `p -> Z p`.
pub fn apply_transform(z: &TransformMatrix, p: &PVector) -> Result<PVector> {
    if p.k() != z.k() {
        return Err(GptError::DimensionMismatch {
            expected: z.k(),
            found: p.k(),
        });
    }
    Ok(PVector::new(
        p.dimension(),
        p.theory(),
        z.matrix() * p.values(),
    ))
}

/// `I - sum M^dagger M` is positive semidefinite to `1e-10`.
pub fn is_trace_nonincreasing(kraus: &KrausSet) -> bool {
    let n = kraus.dimension();
    let gap = CMatrix::identity(n, n) - kraus.effect_sum();
    hermitian_eigenvalues(&gap).first().copied().unwrap_or(0.0) >= -PSD_TOL
}

/// A superoperator as Kraus operators or as an `N^2 x N^2` column-major matrix.
#[derive(Debug, Clone)]
pub enum Superoperator {
    Kraus(KrausSet),
    Matrix { n: usize, matrix: CMatrix },
}

impl Superoperator {
    pub fn dimension(&self) -> usize {
        match self {
            Superoperator::Kraus(k) => k.dimension(),
            Superoperator::Matrix { n, .. } => *n,
        }
    }

    fn check(&self) -> Result<()> {
        if let Superoperator::Matrix { n, matrix } = self {
            let n2 = n * n;
            if *n == 0 || matrix.nrows() != n2 || matrix.ncols() != n2 {
                return Err(GptError::MalformedSuperoperator(format!(
                    "expected {n2}x{n2} matrix, got {}x{}",
                    matrix.nrows(),
                    matrix.ncols()
                )));
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        match self {
            Superoperator::Kraus(k) => k.apply(x),
            Superoperator::Matrix { n, matrix } => {
                let v = nalgebra::DVector::from_column_slice(x.as_slice());
                CMatrix::from_column_slice(*n, *n, (matrix * v).as_slice())
            }
        }
    }
}

/// Superoperator matrix of the transpose map `X -> X^T`.
pub fn transpose_superoperator(n: usize) -> Superoperator {
    let n2 = n * n;
    let mut s = CMatrix::zeros(n2, n2);
    for i in 0..n {
        for j in 0..n {
            s[(i + n * j, j + n * i)] = c(1.0, 0.0);
        }
    }
    Superoperator::Matrix { n, matrix: s }
}

/// Normalized Choi matrix `(1/N) sum_ij E_ij (x) $(E_ij)`.
pub fn choi_matrix(s: &Superoperator) -> Result<CMatrix> {
    s.check()?;
    let n = s.dimension();
    let mut choi = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(i, j)] = c(1.0, 0.0);
            choi += e.kronecker(&s.apply(&e));
        }
    }
    Ok(choi / c(n as f64, 0.0))
}

/// Choi matrix positive semidefinite to `1e-10`.
pub fn is_completely_positive(s: &Superoperator) -> Result<bool> {
    let choi = choi_matrix(s)?;
    Ok(hermitian_eigenvalues(&choi).first().copied().unwrap_or(0.0) >= -PSD_TOL)
}

/// Z is well conditioned and its inverse keeps every witness state valid.
pub fn is_reversible(z: &TransformMatrix, theory: &Theory, witnesses: &[PVector]) -> bool {
    reversibility_violation(z, theory, witnesses).is_none()
}

/// First reason `z` fails [`is_reversible`], if any.
pub fn reversibility_violation(
    z: &TransformMatrix,
    theory: &Theory,
    witnesses: &[PVector],
) -> Option<String> {
    if z.k() != theory.k() {
        return Some(format!("Z is {}x{} but K = {}", z.k(), z.k(), theory.k()));
    }
    let cond = condition_number(z.matrix());
    if cond.is_nan() || cond >= MAX_CONDITION {
        return Some(format!("condition number {cond:e}"));
    }
    let lu = z.matrix().clone().lu();
    for (i, w) in witnesses.iter().enumerate() {
        let Some(back) = lu.solve(w.values()) else {
            return Some("Z is singular".into());
        };
        let p = PVector::new(w.dimension(), w.theory(), back);
        if let Some(why) = theory.state_violation(&p, PURITY_TOL) {
            return Some(format!("witness {i}: {why}"));
        }
    }
    None
}

/// One outcome of a measurement that lets the system through.
#[derive(Debug, Clone)]
pub struct MeasurementBranch {
    pub transform: TransformMatrix,
    /// Measurement r-vector giving the probability of this outcome.
    pub outcome: RVector,
    /// Operator-level description, when known.
    pub kraus: Option<KrausSet>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasurementUpdateReport {
    /// `max |r^I . Z_l p - r_l . p|` over branches and witnesses.
    pub outcome_deviation: f64,
    /// `max |(sum_l Z_l)^T r^I - r^I|`.
    pub identity_deviation: f64,
    /// `max |sum_l M_l^dagger M_l - I|`, when every branch has Kraus operators.
    pub completeness_deviation: Option<f64>,
    pub tolerance: f64,
    pub violations: Vec<String>,
}

impl MeasurementUpdateReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the two normalization constraints on post-measurement transforms and
/// the operator-level completeness `sum M^dagger M = I`.
pub fn check_measurement_update(
    branches: &[MeasurementBranch],
    theory: &Theory,
    witnesses: &[PVector],
    tol: f64,
) -> Result<MeasurementUpdateReport> {
    if branches.is_empty() {
        return Err(GptError::Empty("measurement branches"));
    }
    let ri = theory.r_identity().values();
    let mut violations = Vec::new();

    let mut outcome_deviation = 0.0_f64;
    for (l, b) in branches.iter().enumerate() {
        for (w, p) in witnesses.iter().enumerate() {
            let after = apply_transform(&b.transform, p)?;
            let dev = (ri.dot(after.values()) - b.outcome.dot_p(p)).abs();
            outcome_deviation = outcome_deviation.max(dev);
            if dev > tol {
                violations.push(format!(
                    "branch {l}, witness {w}: r^I.Z p differs from r_l.p by {dev:e}"
                ));
            }
        }
    }

    let total = TransformMatrix::sum(branches.iter().map(|b| &b.transform))?;
    let identity_deviation =
        crate::linalg::max_abs_diff_vec(&(total.matrix().transpose() * ri), ri);
    if identity_deviation > tol {
        violations.push(format!(
            "(sum Z_l)^T r^I differs from r^I by {identity_deviation:e}"
        ));
    }

    let completeness_deviation = if branches.iter().all(|b| b.kraus.is_some()) {
        let n = theory.dimension();
        let sum = branches
            .iter()
            .filter_map(|b| b.kraus.as_ref())
            .fold(CMatrix::zeros(n, n), |acc, k| acc + k.effect_sum());
        let dev = max_abs_diff_c(&sum, &CMatrix::identity(n, n));
        if dev > tol {
            violations.push(format!("sum M^dagger M differs from I by {dev:e}"));
        }
        Some(dev)
    } else {
        None
    };

    Ok(MeasurementUpdateReport {
        outcome_deviation,
        identity_deviation,
        completeness_deviation,
        tolerance: tol,
        violations,
    })
}

/// Branches of the projective basis measurement: `rho -> P_k rho P_k` with outcome `r_k`.
pub fn von_neumann_branches(theory: &Theory) -> Result<Vec<MeasurementBranch>> {
    let n = theory.dimension();
    theory
        .basis_measurements()
        .into_iter()
        .enumerate()
        .map(|(k, outcome)| {
            let kraus = KrausSet::new(vec![crate::linalg::basis_projector(n, k)])?;
            let transform = z_from_kraus(&kraus, theory.frame(), theory.d())?;
            Ok(MeasurementBranch {
                transform,
                outcome,
                kraus: Some(kraus),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    pub theory: TheoryKind,
    pub steps: usize,
    /// `max_t |r(t)^T D r(t) - 1|` along the path.
    pub max_purity_deviation: f64,
    /// `r^T D r` at the midpoint of the path.
    pub midpoint_purity: f64,
    /// Distance between the path's end and the requested endpoint.
    pub endpoint_error: f64,
    /// Every point on the path is pure (to `1e-9`).
    pub pure_path: bool,
}

/// Probes whether two pure states are joined by a path of pure states.
///
/// Quantum theories follow the geodesic unitary family `U(t) = exp(t log U_ab)`;
/// classical theories have only the mixing segment between the endpoints.
pub fn continuity_probe(
    r_a: &RVector,
    r_b: &RVector,
    steps: usize,
    theory: &Theory,
) -> Result<ContinuityReport> {
    for (which, r) in [("a", r_a), ("b", r_b)] {
        if r.k() != theory.k() {
            return Err(GptError::DimensionMismatch {
                expected: theory.k(),
                found: r.k(),
            });
        }
        if !theory.is_pure(r) {
            return Err(GptError::ImpureEndpoint {
                which,
                deviation: purity_deviation(r, theory.d()),
            });
        }
    }
    let steps = steps.max(1);
    let ts: Vec<f64> = (0..=steps).map(|s| s as f64 / steps as f64).collect();
    let d = theory.d();

    let (path, endpoint_error): (Vec<RVector>, f64) = match theory.kind() {
        TheoryKind::Quantum => {
            let rho_a = density_from_r(r_a, theory.frame())?.into_matrix();
            let rho_b = density_from_r(r_b, theory.frame())?.into_matrix();
            let (_, psi_a) = dominant_eigenvector(&rho_a);
            let (_, psi_b) = dominant_eigenvector(&rho_b);
            let u_ab = complete_basis(&psi_b) * complete_basis(&psi_a).adjoint();
            let log = UnitaryLog::new(&u_ab);
            let mut path = Vec::with_capacity(ts.len());
            let mut last = rho_a.clone();
            for &t in &ts {
                let u = log.power(t);
                let rho = &u * &rho_a * u.adjoint();
                let p = theory.p_from_density(&crate::state::DensityOperator::new(rho.clone()))?;
                path.push(theory.r_from_p(&p)?);
                last = rho;
            }
            (path, max_abs_diff_c(&last, &rho_b))
        }
        TheoryKind::Classical => {
            let path = ts
                .iter()
                .map(|&t| RVector::new(r_a.role(), r_a.values() * (1.0 - t) + r_b.values() * t))
                .collect();
            (path, 0.0)
        }
    };

    let max_purity_deviation = path
        .iter()
        .map(|r| purity_deviation(r, d))
        .fold(0.0, f64::max);
    let mid = path.len() / 2;
    let midpoint_purity = if steps.is_multiple_of(2) {
        d.bilinear(path[mid].values(), path[mid].values())
    } else {
        // odd step count: evaluate the exact midpoint separately
        midpoint(r_a, r_b, theory)?
    };
    Ok(ContinuityReport {
        theory: theory.kind(),
        steps,
        max_purity_deviation,
        midpoint_purity,
        endpoint_error,
        pure_path: max_purity_deviation < PURITY_TOL,
    })
}

fn midpoint(r_a: &RVector, r_b: &RVector, theory: &Theory) -> Result<f64> {
    let report = continuity_probe(r_a, r_b, 2, theory)?;
    Ok(report.midpoint_purity)
}

/// p-vector of `rho` mapped by a Kraus set, computed at operator level.
pub fn transformed_p(kraus: &KrausSet, rho: &CMatrix, theory: &Theory) -> Result<RVec> {
    theory.frame().traces_against(&kraus.apply(rho))
}
