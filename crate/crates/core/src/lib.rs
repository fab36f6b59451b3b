//! Operational probability theories built from a fiducial frame of projectors.
//!
//! States are p-vectors of fiducial probabilities, measurements are r-vectors,
//! and the two meet through the frame's Gram matrix `D`. The same code path
//! serves classical theories (basis projectors, `D = I`) and quantum theories
//! (the `N^2` canonical projectors).

pub mod axioms;
pub mod bloch;
pub mod composite;
pub mod dynamics;
pub mod error;
pub mod frame;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod sampling;
pub mod state;

pub use error::{GptError, Result};
pub use frame::{
    build_canonical_frame, build_classical_frame, gram_matrix, FiducialFrame, FiducialLabel,
    GramMatrix,
};
pub use state::{DensityOperator, MeasurementOperator, PVector, RVector, Role, Theory, TheoryKind};
