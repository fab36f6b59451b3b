//! p- and r-type vectors, their operator counterparts, and the classical and
//! quantum theory instances built from a fiducial frame.
//!
//! A state is described either by its fiducial probabilities `p` (p-type) or
//! by its expansion coefficients `r` in the frame (`rho = sum_k r_k P_k`). The
//! two are related by `p = D r`. A measurement is an r-type vector `r_M`
//! with `A = sum_k r_M[k] P_k`, and the outcome probability is
//! `r_M . p_S = r_M^T D r_S`.
//!
//! Conversions are total: they accept vectors with entries outside `[0, 1]`
//! or `mu > 1`. Validity is a separate question answered by
//! [`Theory::is_valid_state`].

use serde::{Deserialize, Serialize};

use crate::error::{GptError, Result};
use crate::frame::{
    build_canonical_frame, build_classical_frame, gram_matrix, FiducialFrame, FiducialLabel,
    GramMatrix,
};
use crate::linalg::{
    hermitian_deviation, hermitian_eigenvalues, CMatrix, RVec, LINALG_TOL, PSD_TOL, PURITY_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryKind {
    Classical,
    Quantum,
}

impl TheoryKind {
    fn infer(n: usize, k: usize) -> Self {
        if k == n {
            TheoryKind::Classical
        } else {
            TheoryKind::Quantum
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    State,
    Measurement,
}

/// Fiducial-measurement probabilities of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct PVector {
    values: RVec,
    n: usize,
    theory: TheoryKind,
}

impl PVector {
    pub fn new(n: usize, theory: TheoryKind, values: RVec) -> Self {
        Self { values, n, theory }
    }

    pub fn from_slice(n: usize, theory: TheoryKind, values: &[f64]) -> Self {
        Self::new(n, theory, RVec::from_column_slice(values))
    }

    /// The null state (system absent).
    pub fn null(n: usize, theory: TheoryKind, k: usize) -> Self {
        Self::new(n, theory, RVec::zeros(k))
    }

    pub fn values(&self) -> &RVec {
        &self.values
    }

    pub fn into_values(self) -> RVec {
        self.values
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn theory(&self) -> TheoryKind {
        self.theory
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.n, self.theory, &self.values * factor)
    }
}

/// Real expansion coefficients of a state or measurement in the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RVector {
    values: RVec,
    role: Role,
}

impl RVector {
    pub fn new(role: Role, values: RVec) -> Self {
        Self { values, role }
    }

    pub fn state(values: &[f64]) -> Self {
        Self::new(Role::State, RVec::from_column_slice(values))
    }

    pub fn measurement(values: &[f64]) -> Self {
        Self::new(Role::Measurement, RVec::from_column_slice(values))
    }

    pub fn values(&self) -> &RVec {
        &self.values
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// `r . p`, the outcome probability of this measurement on state `p`.
    pub fn dot_p(&self, p: &PVector) -> f64 {
        self.values.dot(p.values())
    }
}

/// A state operator `rho` (positive, trace at most one when valid).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(CMatrix);

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Self {
        Self(matrix)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.nrows()
    }

    /// Hermitian, eigenvalues `>= -1e-10`, trace in `[0, 1]`.
    pub fn is_valid(&self) -> bool {
        if !self.0.is_square() || hermitian_deviation(&self.0) > LINALG_TOL {
            return false;
        }
        let tr = self.0.trace().re;
        let min = hermitian_eigenvalues(&self.0)
            .first()
            .copied()
            .unwrap_or(0.0);
        min >= -PSD_TOL && (-LINALG_TOL..=1.0 + LINALG_TOL).contains(&tr)
    }

    /// `tr(rho^2)`
    pub fn purity(&self) -> f64 {
        crate::linalg::trace_product(&self.0, &self.0).re
    }
}

/// A POVM element `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperator(CMatrix);

impl MeasurementOperator {
    pub fn new(matrix: CMatrix) -> Self {
        Self(matrix)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Hermitian with spectrum in `[-1e-10, 1 + 1e-10]`.
    pub fn is_valid(&self) -> bool {
        if !self.0.is_square() || hermitian_deviation(&self.0) > LINALG_TOL {
            return false;
        }
        let eig = hermitian_eigenvalues(&self.0);
        eig.iter().all(|&e| (-PSD_TOL..=1.0 + PSD_TOL).contains(&e))
    }
}

/// `p_k = tr(P_k rho)`.
pub fn p_from_density(rho: &DensityOperator, frame: &FiducialFrame) -> Result<PVector> {
    let values = frame.traces_against(rho.matrix())?;
    Ok(PVector::new(
        frame.dimension(),
        TheoryKind::infer(frame.dimension(), frame.len()),
        values,
    ))
}

/// `r = D^{-1} p` by LU solve.
pub fn r_from_p(p: &PVector, d: &GramMatrix) -> Result<RVector> {
    Ok(RVector::new(Role::State, d.solve(p.values())?))
}

/// `p = D r`.
pub fn p_from_r(r: &RVector, d: &GramMatrix) -> Result<PVector> {
    if r.k() != d.k() {
        return Err(GptError::DimensionMismatch {
            expected: d.k(),
            found: r.k(),
        });
    }
    let n = d.dimension();
    Ok(PVector::new(
        n,
        TheoryKind::infer(n, d.k()),
        d.matrix() * r.values(),
    ))
}

/// `rho = sum_k r_k P_k`.
pub fn density_from_r(r: &RVector, frame: &FiducialFrame) -> Result<DensityOperator> {
    frame.combine(r.values()).map(DensityOperator)
}

/// `A = sum_k r_k P_k`.
pub fn measurement_from_r(r: &RVector, frame: &FiducialFrame) -> Result<MeasurementOperator> {
    frame.combine(r.values()).map(MeasurementOperator)
}

/// r-vector of a measurement operator: `r = D^{-1} tr(P A)`.
pub fn measurement_r_from_operator(
    a: &MeasurementOperator,
    frame: &FiducialFrame,
    d: &GramMatrix,
) -> Result<RVector> {
    let p_m = frame.traces_against(a.matrix())?;
    Ok(RVector::new(Role::Measurement, d.solve(&p_m)?))
}

/// `r_M^T D r_S`. Values outside `[0, 1]` are returned as-is.
pub fn probability(r_m: &RVector, d: &GramMatrix, r_s: &RVector) -> Result<f64> {
    for r in [r_m, r_s] {
        if r.k() != d.k() {
            return Err(GptError::DimensionMismatch {
                expected: d.k(),
                found: r.k(),
            });
        }
    }
    Ok(d.bilinear(r_m.values(), r_s.values()))
}

/// `mu = r^I . p`
pub fn normalization(p: &PVector, r_identity: &RVector) -> f64 {
    r_identity.dot_p(p)
}

/// `|r^T D r - 1|`, the distance of a state from the pure surface.
pub fn purity_deviation(r: &RVector, d: &GramMatrix) -> f64 {
    (d.bilinear(r.values(), r.values()) - 1.0).abs()
}

/// Pure iff `r^T D r = 1` and `mu = 1`, both within `tol`.
pub fn is_pure(r: &RVector, d: &GramMatrix, r_identity: &RVector, tol: f64) -> bool {
    let mu = d.bilinear(r_identity.values(), r.values());
    purity_deviation(r, d) <= tol && (mu - 1.0).abs() <= tol
}

/// Componentwise convex combination; a weight deficit below one is weight on the null state.
pub fn mix(states: &[PVector], weights: &[f64]) -> Result<PVector> {
    let first = states.first().ok_or(GptError::Empty("states"))?;
    if weights.len() != states.len() {
        return Err(GptError::DimensionMismatch {
            expected: states.len(),
            found: weights.len(),
        });
    }
    if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| **w < 0.0) {
        return Err(GptError::NegativeWeight { index, value });
    }
    let total: f64 = weights.iter().sum();
    if total > 1.0 + LINALG_TOL {
        return Err(GptError::WeightsExceedUnity(total));
    }
    let mut acc = RVec::zeros(first.k());
    for (p, &w) in states.iter().zip(weights) {
        if p.k() != first.k() {
            return Err(GptError::DimensionMismatch {
                expected: first.k(),
                found: p.k(),
            });
        }
        acc += p.values() * w;
    }
    Ok(PVector::new(first.dimension(), first.theory(), acc))
}

/// A concrete theory: frame, D matrix and identity measurement.
#[derive(Debug, Clone)]
pub struct Theory {
    kind: TheoryKind,
    frame: FiducialFrame,
    d: GramMatrix,
    r_identity: RVector,
}

impl Theory {
    /// Canonical quantum theory with `K = N^2`.
    pub fn quantum(n: usize) -> Result<Self> {
        Self::from_frame(TheoryKind::Quantum, build_canonical_frame(n)?)
    }

    /// Classical theory with `K = N` and `D = I`.
    pub fn classical(n: usize) -> Result<Self> {
        Self::from_frame(TheoryKind::Classical, build_classical_frame(n)?)
    }

    pub fn new(kind: TheoryKind, n: usize) -> Result<Self> {
        match kind {
            TheoryKind::Classical => Self::classical(n),
            TheoryKind::Quantum => Self::quantum(n),
        }
    }

    /// Builds a theory over any frame that contains all `N` basis projectors.
    pub fn from_frame(kind: TheoryKind, frame: FiducialFrame) -> Result<Self> {
        let d = gram_matrix(&frame)?;
        let n = frame.dimension();
        let mut ri = RVec::zeros(frame.len());
        for b in 0..n {
            let idx = frame.index_of(FiducialLabel::Basis(b)).ok_or_else(|| {
                GptError::NotInFamily(format!("frame lacks basis projector {}", b + 1))
            })?;
            ri[idx] = 1.0;
        }
        Ok(Self {
            kind,
            frame,
            d,
            r_identity: RVector::new(Role::Measurement, ri),
        })
    }

    pub fn kind(&self) -> TheoryKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.frame.dimension()
    }

    pub fn k(&self) -> usize {
        self.frame.len()
    }

    pub fn frame(&self) -> &FiducialFrame {
        &self.frame
    }

    pub fn d(&self) -> &GramMatrix {
        &self.d
    }

    pub fn r_identity(&self) -> &RVector {
        &self.r_identity
    }

    fn basis_index(&self, b: usize) -> usize {
        self.frame
            .index_of(FiducialLabel::Basis(b))
            .expect("checked at construction")
    }

    /// p-vectors of the `N` basis states.
    pub fn basis_states(&self) -> Vec<PVector> {
        (0..self.dimension())
            .map(|b| {
                let col = self.d.matrix().column(self.basis_index(b)).into_owned();
                PVector::new(self.dimension(), self.kind, col)
            })
            .collect()
    }

    /// r-vectors of the basis states (unit vectors on the basis fiducials).
    pub fn basis_state_rs(&self) -> Vec<RVector> {
        (0..self.dimension())
            .map(|b| {
                let mut r = RVec::zeros(self.k());
                r[self.basis_index(b)] = 1.0;
                RVector::new(Role::State, r)
            })
            .collect()
    }

    /// r-vectors of the basis measurements.
    pub fn basis_measurements(&self) -> Vec<RVector> {
        self.basis_state_rs()
            .into_iter()
            .map(|r| RVector::new(Role::Measurement, r.values().clone()))
            .collect()
    }

    pub fn p_from_density(&self, rho: &DensityOperator) -> Result<PVector> {
        let mut p = p_from_density(rho, &self.frame)?;
        p.theory = self.kind;
        Ok(p)
    }

    pub fn r_from_p(&self, p: &PVector) -> Result<RVector> {
        r_from_p(p, &self.d)
    }

    pub fn p_from_r(&self, r: &RVector) -> Result<PVector> {
        let mut p = p_from_r(r, &self.d)?;
        p.theory = self.kind;
        Ok(p)
    }

    pub fn density_from_p(&self, p: &PVector) -> Result<DensityOperator> {
        density_from_r(&self.r_from_p(p)?, &self.frame)
    }

    pub fn normalization(&self, p: &PVector) -> f64 {
        normalization(p, &self.r_identity)
    }

    pub fn is_pure(&self, r: &RVector) -> bool {
        is_pure(r, &self.d, &self.r_identity, PURITY_TOL)
    }

    /// Entries in `[0, 1]`, `mu` in `[0, 1]`, and the reconstructed operator positive.
    pub fn is_valid_state(&self, p: &PVector) -> bool {
        self.state_violation(p, PSD_TOL).is_none()
    }

    /// First reason `p` is not an allowed state, if any.
    pub fn state_violation(&self, p: &PVector, tol: f64) -> Option<String> {
        if p.k() != self.k() {
            return Some(format!("length {} != K = {}", p.k(), self.k()));
        }
        if let Some((i, v)) = p
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= -tol && **v <= 1.0 + tol))
        {
            return Some(format!("entry {i} = {v} outside [0, 1]"));
        }
        let mu = self.normalization(p);
        if !(mu >= -tol && mu <= 1.0 + tol) {
            return Some(format!("normalization {mu} outside [0, 1]"));
        }
        let rho = match self.density_from_p(p) {
            Ok(rho) => rho,
            Err(e) => return Some(e.to_string()),
        };
        let min = hermitian_eigenvalues(rho.matrix())
            .first()
            .copied()
            .unwrap_or(0.0);
        if min < -tol.max(PSD_TOL) {
            return Some(format!("reconstructed operator has eigenvalue {min:e}"));
        }
        None
    }
}

/// The classical theory on `n` basis states: `D = I`, basis p-vectors are unit vectors.
pub fn classical_theory(n: usize) -> Result<Theory> {
    Theory::classical(n)
}

/// Pure states of the classical theory: the `N` unit vectors (vertices of the simplex).
pub fn classical_pure_states(n: usize) -> Result<Vec<PVector>> {
    if n == 0 {
        return Err(GptError::InvalidDimension(n));
    }
    Ok((0..n)
        .map(|k| {
            let mut v = RVec::zeros(n);
            v[k] = 1.0;
            PVector::new(n, TheoryKind::Classical, v)
        })
        .collect())
}
