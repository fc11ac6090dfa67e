//! Seeded random generators shared by unit, integration and acceptance tests.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C64 = Complex<f64>;
type CMatrix = DMatrix<C64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex::new(gaussian(rng), gaussian(rng)))
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> CMatrix {
    let g = random_matrix(rng, d, d);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    let qr = random_matrix(rng, d, d).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 { z / z.norm() } else { Complex::new(1.0, 0.0) }
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    q * phases
}

/// Full-rank density matrix `G G† / Tr(G G†)`.
pub fn random_density(rng: &mut impl Rng, d: usize) -> CMatrix {
    let g = random_matrix(rng, d, d);
    let m = &g * g.adjoint();
    let tr: C64 = (0..d).map(|i| m[(i, i)]).sum();
    m / tr
}

pub fn random_probabilities(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub fn diag_density(p: &[f64]) -> CMatrix {
    let d = p.len();
    CMatrix::from_fn(d, d, |i, j| if i == j { Complex::new(p[i], 0.0) } else { Complex::new(0.0, 0.0) })
}

pub fn basis(d: usize, k: usize) -> CMatrix {
    let mut v = DVector::from_element(d, Complex::new(0.0, 0.0));
    v[k] = Complex::new(1.0, 0.0);
    CMatrix::from_column_slice(d, 1, v.as_slice())
}

pub fn ket_bra(d: usize, i: usize, j: usize) -> CMatrix {
    basis(d, i) * basis(d, j).adjoint()
}
