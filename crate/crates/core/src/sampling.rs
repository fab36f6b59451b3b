//! Seeded random generators for states, unitaries and Kraus sets.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, CMatrix, C64};

/// Deterministic generator used throughout the crate and its tests.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child stream `stream` of the generator seeded by `seed`.
pub fn split_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-random unit vector in `C^n` (normalized complex Gaussian).
pub fn haar_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(n, |_, _| complex_gaussian(rng));
    v.normalize()
}

/// Random full-rank density operator `G G^dagger / tr(G G^dagger)`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Random sub-normalized density operator with trace drawn uniformly from `[0, 1]`.
pub fn random_subnormalized_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let scale: f64 = rng.random();
    random_density(n, rng) * c(scale, 0.0)
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let (q, r) = ginibre(n, n, rng).qr().unpack();
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / c(d.norm(), 0.0)
        } else {
            c(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random trace-preserving Kraus set with `count` elements, cut from a random isometry.
pub fn random_kraus<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Vec<CMatrix> {
    let (q, _) = ginibre(n * count, n, rng).qr().unpack();
    (0..count).map(|l| q.rows(l * n, n).into_owned()).collect()
}

/// Random Hermitian operator with spectrum in `[0, 1]` (a POVM element).
pub fn random_effect<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let u = haar_unitary(n, rng);
    let mut diag = CMatrix::zeros(n, n);
    for i in 0..n {
        let x: f64 = rng.random();
        diag[(i, i)] = c(x, 0.0);
    }
    &u * diag * u.adjoint()
}
