//! Bipartite states stored as `K_A x K_B` matrices of joint fiducial probabilities.

use serde::Serialize;

use crate::dynamics::TransformMatrix;
use crate::error::{GptError, Result};
use crate::frame::{gram_matrix, FiducialFrame, GramMatrix};
use crate::linalg::{
    c, min_hermitian_eigenvalue, partial_transpose_b, rank, trace_product, CMatrix, RMatrix, RVec,
    SINGULAR_TOL,
};
use crate::state::{PVector, RVector, TheoryKind};

/// `p~[i][j]`: probability of fiducial `i` at A and fiducial `j` at B.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeState {
    pub n_a: usize,
    pub n_b: usize,
    #[serde(serialize_with = "serialize_rows")]
    pub p: RMatrix,
}

fn serialize_rows<S: serde::Serializer>(m: &RMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for row in m.row_iter() {
        seq.serialize_element(&row.iter().copied().collect::<Vec<f64>>())?;
    }
    seq.end()
}

impl CompositeState {
    pub fn k_a(&self) -> usize {
        self.p.nrows()
    }

    pub fn k_b(&self) -> usize {
        self.p.ncols()
    }

    /// Row-major flattening into a `K_A K_B` vector.
    pub fn flatten(&self) -> RVec {
        RVec::from_iterator(self.p.len(), self.p.transpose().iter().copied())
    }

    /// `(r^I_A)^T p~ r^I_B`
    pub fn joint_normalization(&self, ri_a: &RVector, ri_b: &RVector) -> f64 {
        ri_a.values().dot(&(&self.p * ri_b.values()))
    }
}

/// `p~ = p_a p_b^T`.
pub fn product_state(p_a: &PVector, p_b: &PVector) -> CompositeState {
    CompositeState {
        n_a: p_a.dimension(),
        n_b: p_b.dimension(),
        p: p_a.values() * p_b.values().transpose(),
    }
}

/// `p~[i][j] = tr((P_i (x) P_j) rho)`.
pub fn composite_from_density(
    rho_ab: &CMatrix,
    frame_a: &FiducialFrame,
    frame_b: &FiducialFrame,
) -> Result<CompositeState> {
    let (n_a, n_b) = (frame_a.dimension(), frame_b.dimension());
    let n = n_a * n_b;
    if rho_ab.nrows() != n || rho_ab.ncols() != n {
        return Err(GptError::DimensionMismatch {
            expected: n,
            found: rho_ab.nrows(),
        });
    }
    let mut p = RMatrix::zeros(frame_a.len(), frame_b.len());
    for (i, pa) in frame_a.projectors().iter().enumerate() {
        for (j, pb) in frame_b.projectors().iter().enumerate() {
            p[(i, j)] = trace_product(&pa.kronecker(pb), rho_ab).re;
        }
    }
    Ok(CompositeState { n_a, n_b, p })
}

/// `p~ -> Z_A p~ Z_B^T`.
pub fn local_transform(
    pt: &CompositeState,
    z_a: &TransformMatrix,
    z_b: &TransformMatrix,
) -> Result<CompositeState> {
    if z_a.k() != pt.k_a() {
        return Err(GptError::DimensionMismatch {
            expected: pt.k_a(),
            found: z_a.k(),
        });
    }
    if z_b.k() != pt.k_b() {
        return Err(GptError::DimensionMismatch {
            expected: pt.k_b(),
            found: z_b.k(),
        });
    }
    Ok(CompositeState {
        n_a: pt.n_a,
        n_b: pt.n_b,
        p: z_a.matrix() * &pt.p * z_b.matrix().transpose(),
    })
}

/// State of A prepared by keeping runs where fiducial `j` at B fired: the `j`-th column.
pub fn conditional_state(pt: &CompositeState, j: usize) -> Result<PVector> {
    if j >= pt.k_b() {
        return Err(GptError::IndexOutOfRange {
            index: j,
            size: pt.k_b(),
        });
    }
    let theory = if pt.k_a() == pt.n_a {
        TheoryKind::Classical
    } else {
        TheoryKind::Quantum
    };
    Ok(PVector::new(pt.n_a, theory, pt.p.column(j).into_owned()))
}

/// `r~` with `p~ = D_A r~ D_B^T`.
pub fn r_tilde(pt: &CompositeState, d_a: &GramMatrix, d_b: &GramMatrix) -> Result<RMatrix> {
    let left = d_a.solve_matrix(&pt.p)?;
    Ok(d_b.solve_matrix(&left.transpose())?.transpose())
}

/// `rho = sum_kl r~_kl P_k (x) P_l`.
pub fn density_from_composite(
    pt: &CompositeState,
    frame_a: &FiducialFrame,
    frame_b: &FiducialFrame,
) -> Result<CMatrix> {
    let d_a = gram_matrix(frame_a)?;
    let d_b = gram_matrix(frame_b)?;
    let r = r_tilde(pt, &d_a, &d_b)?;
    let n = frame_a.dimension() * frame_b.dimension();
    let mut rho = CMatrix::zeros(n, n);
    for (k, pa) in frame_a.projectors().iter().enumerate() {
        for (l, pb) in frame_b.projectors().iter().enumerate() {
            if r[(k, l)] != 0.0 {
                rho += pa.kronecker(pb) * c(r[(k, l)], 0.0);
            }
        }
    }
    Ok(rho)
}

/// Smallest eigenvalue of the partial transpose of the reconstructed two-qubit operator.
/// A negative value certifies entanglement.
pub fn partial_transpose_min_eigenvalue(
    pt: &CompositeState,
    frame_a: &FiducialFrame,
    frame_b: &FiducialFrame,
) -> Result<f64> {
    if frame_a.dimension() != 2 || frame_b.dimension() != 2 {
        return Err(GptError::DimensionMismatch {
            expected: 2,
            found: frame_a.dimension().max(frame_b.dimension()),
        });
    }
    let rho = density_from_composite(pt, frame_a, frame_b)?;
    Ok(min_hermitian_eigenvalue(&partial_transpose_b(&rho, 2, 2)))
}

/// Rank of the `K_A K_B` product states built from pairs of fiducial states.
pub fn dof_count_check(frame_a: &FiducialFrame, frame_b: &FiducialFrame) -> Result<usize> {
    let d_a = gram_matrix(frame_a)?;
    let d_b = gram_matrix(frame_b)?;
    let (k_a, k_b) = (d_a.k(), d_b.k());
    let mut rows = RMatrix::zeros(k_a * k_b, k_a * k_b);
    for i in 0..k_a {
        for j in 0..k_b {
            // the i-th fiducial state has p-vector D e_i
            let p_a = PVector::new(
                frame_a.dimension(),
                TheoryKind::Quantum,
                d_a.matrix().column(i).into_owned(),
            );
            let p_b = PVector::new(
                frame_b.dimension(),
                TheoryKind::Quantum,
                d_b.matrix().column(j).into_owned(),
            );
            let flat = product_state(&p_a, &p_b).flatten();
            rows.row_mut(i * k_b + j).copy_from(&flat.transpose());
        }
    }
    Ok(rank(&rows, SINGULAR_TOL))
}
