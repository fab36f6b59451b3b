//! JSON file formats.
//!
//! Complex entries are `[re, im]` pairs and matrices are row-major arrays of
//! rows. Conventional extensions: `.frame.json`, `.dmat.json`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::composite::CompositeState;
use crate::dynamics::KrausSet;
use crate::error::{GptError, Result};
use crate::frame::{FiducialFrame, GramMatrix};
use crate::linalg::{c, CMatrix, RMatrix, RVec};
use crate::state::{PVector, RVector, Role, TheoryKind};

pub type ComplexRows = Vec<Vec<[f64; 2]>>;

pub fn complex_rows(m: &CMatrix) -> ComplexRows {
    m.row_iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_complex_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(GptError::DimensionMismatch {
            expected: ncols,
            found: bad.len(),
        });
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

pub fn real_rows(m: &RMatrix) -> Vec<Vec<f64>> {
    m.row_iter()
        .map(|row| row.iter().copied().collect())
        .collect()
}

pub fn matrix_from_real_rows(rows: &[Vec<f64>]) -> Result<RMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(GptError::DimensionMismatch {
            expected: ncols,
            found: bad.len(),
        });
    }
    Ok(RMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FrameFile {
    pub dimension: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub labels: Vec<String>,
    pub projectors: Vec<ComplexRows>,
}

impl From<&FiducialFrame> for FrameFile {
    fn from(f: &FiducialFrame) -> Self {
        Self {
            dimension: f.dimension(),
            k: f.len(),
            labels: f.labels().iter().map(ToString::to_string).collect(),
            projectors: f.projectors().iter().map(complex_rows).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DMatrixFile {
    pub dimension: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
}

impl From<&GramMatrix> for DMatrixFile {
    fn from(d: &GramMatrix) -> Self {
        Self {
            dimension: d.dimension(),
            k: d.k(),
            rows: real_rows(d.matrix()),
        }
    }
}

impl DMatrixFile {
    pub fn to_gram(&self) -> Result<GramMatrix> {
        GramMatrix::new(self.dimension, matrix_from_real_rows(&self.rows)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    P,
    R,
}

/// Header `{dimension, K, role}` plus the entries of a p- or r-type vector.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VectorFile {
    pub dimension: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub role: Role,
    pub representation: Representation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheoryKind>,
    pub values: Vec<f64>,
}

impl VectorFile {
    pub fn from_p(p: &PVector) -> Self {
        Self {
            dimension: p.dimension(),
            k: p.k(),
            role: Role::State,
            representation: Representation::P,
            theory: Some(p.theory()),
            values: p.values().iter().copied().collect(),
        }
    }

    pub fn from_r(n: usize, r: &RVector) -> Self {
        Self {
            dimension: n,
            k: r.k(),
            role: r.role(),
            representation: Representation::R,
            theory: None,
            values: r.values().iter().copied().collect(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.values.len() != self.k {
            return Err(GptError::DimensionMismatch {
                expected: self.k,
                found: self.values.len(),
            });
        }
        Ok(())
    }

    pub fn to_p(&self) -> Result<PVector> {
        self.check()?;
        let theory = self.theory.unwrap_or(if self.k == self.dimension {
            TheoryKind::Classical
        } else {
            TheoryKind::Quantum
        });
        Ok(PVector::new(
            self.dimension,
            theory,
            RVec::from_column_slice(&self.values),
        ))
    }

    pub fn to_r(&self) -> Result<RVector> {
        self.check()?;
        Ok(RVector::new(
            self.role,
            RVec::from_column_slice(&self.values),
        ))
    }
}

/// An operator file: either `{dimension, matrix}` or a bare matrix.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OperatorFile {
    WithHeader {
        dimension: usize,
        matrix: ComplexRows,
    },
    Bare(ComplexRows),
}

impl OperatorFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        OperatorFile::WithHeader {
            dimension: m.nrows(),
            matrix: complex_rows(m),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let (rows, dim) = match self {
            OperatorFile::WithHeader { dimension, matrix } => (matrix, Some(*dimension)),
            OperatorFile::Bare(matrix) => (matrix, None),
        };
        let m = matrix_from_complex_rows(rows)?;
        if !m.is_square() {
            return Err(GptError::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if let Some(d) = dim {
            if d != m.nrows() {
                return Err(GptError::DimensionMismatch {
                    expected: d,
                    found: m.nrows(),
                });
            }
        }
        Ok(m)
    }
}

/// Kraus sets are plain JSON lists of complex matrices.
pub fn kraus_to_json(k: &KrausSet) -> Vec<ComplexRows> {
    k.ops().iter().map(complex_rows).collect()
}

pub fn kraus_from_json(list: &[ComplexRows]) -> Result<KrausSet> {
    KrausSet::new(
        list.iter()
            .map(|m| matrix_from_complex_rows(m))
            .collect::<Result<_>>()?,
    )
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CompositeFile {
    pub n_a: usize,
    pub n_b: usize,
    pub k_a: usize,
    pub k_b: usize,
    pub rows: Vec<Vec<f64>>,
}

impl From<&CompositeState> for CompositeFile {
    fn from(s: &CompositeState) -> Self {
        Self {
            n_a: s.n_a,
            n_b: s.n_b,
            k_a: s.k_a(),
            k_b: s.k_b(),
            rows: real_rows(&s.p),
        }
    }
}

impl CompositeFile {
    pub fn to_state(&self) -> Result<CompositeState> {
        let p = matrix_from_real_rows(&self.rows)?;
        if p.nrows() != self.k_a || p.ncols() != self.k_b {
            return Err(GptError::DimensionMismatch {
                expected: self.k_a * self.k_b,
                found: p.len(),
            });
        }
        Ok(CompositeState {
            n_a: self.n_a,
            n_b: self.n_b,
            p,
        })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
