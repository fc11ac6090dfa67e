//! Dense complex matrix kernel.
//!
//! Matrices are `nalgebra` dense complex matrices. Operators are vectorized by
//! column stacking, so `[[a, b], [c, d]]` becomes `(a, c, b, d)` and the
//! product `B·A·C` is represented by the superoperator `Cᵀ ⊗ B`. Every
//! superoperator in this crate is assembled through [`vec_product_map`] so the
//! convention lives in exactly one place.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{contract, shape, Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Relative gate for Hermiticity: `‖H − H†‖ ≤ tol · max(1, ‖H‖)`.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Eigenvector condition estimate above which a matrix counts as defective.
pub const DIAGONALIZABILITY_THRESHOLD: f64 = 1e8;

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    let d = values.len();
    CMatrix::from_fn(d, d, |i, j| if i == j { c64(values[i], 0.0) } else { c64(0.0, 0.0) })
}

/// Builds a matrix from rows of complex entries.
pub fn from_rows(rows: &[Vec<C64>]) -> Result<CMatrix> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(shape("ragged rows"));
    }
    let m = CMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j]);
    ensure_finite(&m)?;
    Ok(m)
}

pub fn ensure_finite(a: &CMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(contract("matrix contains NaN or infinite entries"))
    }
}

pub fn ensure_square(a: &CMatrix, what: &str) -> Result<usize> {
    if a.nrows() == a.ncols() {
        Ok(a.nrows())
    } else {
        Err(shape(format!("{what} must be square, got {}x{}", a.nrows(), a.ncols())))
    }
}

pub fn trace(a: &CMatrix) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hilbert-Schmidt inner product `Tr(A†B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn hermiticity_residual(h: &CMatrix) -> f64 {
    hs_norm(&(h - h.adjoint()))
}

pub fn is_hermitian(h: &CMatrix) -> bool {
    h.is_square() && hermiticity_residual(h) <= HERMITICITY_TOL * hs_norm(h).max(1.0)
}

pub fn unitarity_residual(u: &CMatrix) -> f64 {
    hs_norm(&(u.adjoint() * u - identity(u.ncols())))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    u.is_square() && unitarity_residual(u) <= tol * (u.nrows() as f64).sqrt().max(1.0)
}

/// Kronecker product; entry `(i·p + k, j·q + l)` is `a[i, j] · b[k, l]` for `b` of shape `p × q`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Which factor of a bipartite space to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace of an operator on `H_A ⊗ H_B`, keeping one factor.
pub fn partial_trace(rho: &CMatrix, dims: (usize, usize), keep: Subsystem) -> Result<CMatrix> {
    let (da, db) = dims;
    if rho.nrows() != da * db || rho.ncols() != da * db {
        return Err(shape(format!(
            "partial trace expects a {0}x{0} operator for dims ({da}, {db}), got {1}x{2}",
            da * db,
            rho.nrows(),
            rho.ncols()
        )));
    }
    let out = match keep {
        Subsystem::First => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::Second => CMatrix::from_fn(db, db, |k, l| {
            (0..da).map(|i| rho[(i * db + k, i * db + l)]).sum()
        }),
    };
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are orthonormal eigenvectors, ordered like `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> CMatrix {
        &self.vectors * real_diagonal(&self.values) * self.vectors.adjoint()
    }

    /// `V · diag(f(λ)) · V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mapped: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        &self.vectors * real_diagonal(&mapped) * self.vectors.adjoint()
    }
}

pub fn eig_hermitian(h: &CMatrix) -> Result<HermitianEigen> {
    ensure_square(h, "Hermitian eigendecomposition input")?;
    ensure_finite(h)?;
    if !is_hermitian(h) {
        return Err(contract(format!(
            "matrix is not Hermitian (residual {:.3e})",
            hermiticity_residual(h)
        )));
    }
    let eig = hermitian_part(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(h.nrows(), h.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// Spectral decomposition of a diagonalizable square matrix.
#[derive(Debug, Clone)]
pub struct GeneralEigen {
    pub values: Vec<C64>,
    /// Columns are unit-norm right eigenvectors `|p_a⟩`.
    pub right: CMatrix,
    /// Columns are left eigenvectors `|q_a⟩`, scaled so that `q_a† p_b = δ_ab`.
    pub left: CMatrix,
    /// 2-norm condition number of `right`.
    pub condition: f64,
}

impl GeneralEigen {
    /// `Σ_a f(λ_a) |p_a⟩⟨q_a|`.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> CMatrix {
        let n = self.values.len();
        let diag = CMatrix::from_fn(n, n, |i, j| if i == j { f(self.values[i]) } else { c64(0.0, 0.0) });
        &self.right * diag * self.left.adjoint()
    }
}

fn schur(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    Schur::try_new(m.clone(), f64::EPSILON, 0)
        .map(Schur::unpack)
        .ok_or_else(|| Error::NumericHealth("Schur iteration did not converge".into()))
}

/// Eigenvalues of a square matrix (diagonal of its complex Schur form).
pub fn eigenvalues_general(m: &CMatrix) -> Result<Vec<C64>> {
    let n = ensure_square(m, "eigenvalue input")?;
    ensure_finite(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = schur(m)?;
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Right and left eigenvectors via back substitution on the complex Schur form.
///
/// Returns [`Error::NonDiagonalizable`] when the eigenvector matrix has a
/// condition estimate above [`DIAGONALIZABILITY_THRESHOLD`].
pub fn eig_general(m: &CMatrix) -> Result<GeneralEigen> {
    let n = ensure_square(m, "eigendecomposition input")?;
    ensure_finite(m)?;
    if n == 0 {
        return Ok(GeneralEigen {
            values: Vec::new(),
            right: CMatrix::zeros(0, 0),
            left: CMatrix::zeros(0, 0),
            condition: 1.0,
        });
    }
    let (q, t) = schur(m)?;
    let values: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let smin = (f64::EPSILON * hs_norm(&t)).max(f64::MIN_POSITIVE);

    let mut x = CMatrix::zeros(n, n);
    for k in 0..n {
        x[(k, k)] = c64(1.0, 0.0);
        for j in (0..k).rev() {
            let num: C64 = -((j + 1)..=k).map(|l| t[(j, l)] * x[(l, k)]).sum::<C64>();
            let denom = t[(j, j)] - values[k];
            x[(j, k)] = if denom.norm() > smin {
                num / denom
            } else {
                // Repeated eigenvalue: a vanishing numerator means the
                // eigenspace is genuinely degenerate; otherwise the block is
                // (near) defective and the blow-up is caught by the
                // condition estimate below.
                let scale = ((j + 1)..=k).map(|l| x[(l, k)].norm()).fold(0.0, f64::max);
                if num.norm() <= 1e3 * smin * scale.max(1.0) {
                    c64(0.0, 0.0)
                } else {
                    num / smin
                }
            };
        }
    }

    let mut right = &q * x;
    for mut col in right.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 && norm.is_finite() {
            col.unscale_mut(norm);
        }
    }
    let condition = condition_number(&right);
    if condition.is_nan() || condition > DIAGONALIZABILITY_THRESHOLD {
        return Err(Error::NonDiagonalizable { condition });
    }
    let inv = right
        .clone()
        .try_inverse()
        .ok_or(Error::NonDiagonalizable { condition: f64::INFINITY })?;
    Ok(GeneralEigen { values, right, left: inv.adjoint(), condition })
}

/// 2-norm condition number from the singular values.
pub fn condition_number(m: &CMatrix) -> f64 {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return f64::INFINITY;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Number of singular values above `tol · max(1, σ_max)`.
pub fn numerical_rank(m: &CMatrix, tol: f64) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > tol * max.max(1.0)).count()
}

/// Matrix exponential: spectral route when the input is diagonalizable,
/// otherwise scaling and squaring of a truncated Taylor series.
pub fn matrix_exp(m: &CMatrix) -> CMatrix {
    match expm_spectral(m) {
        Ok(e) => e,
        Err(_) => expm_taylor(m),
    }
}

pub fn expm_spectral(m: &CMatrix) -> Result<CMatrix> {
    let eig = eig_general(m)?;
    Ok(eig.map(|z| z.exp()))
}

pub fn expm_taylor(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm1 = m
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    if !norm1.is_finite() {
        return CMatrix::from_element(n, n, c64(f64::NAN, f64::NAN));
    }
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let a = m.unscale(2f64.powi(squarings));
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=40 {
        term = &term * &a / c64(k as f64, 0.0);
        result += &term;
        if hs_norm(&term) <= f64::EPSILON * hs_norm(&result) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Support projector of a Hermitian matrix: eigenvectors with eigenvalue above `threshold`.
pub fn support_projector(h: &CMatrix, threshold: f64) -> Result<CMatrix> {
    let eig = eig_hermitian(h)?;
    Ok(eig.map(|x| if x > threshold { 1.0 } else { 0.0 }))
}

/// A column-stacked operator `|A⟩⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct VecOperator {
    data: DVector<C64>,
    side: usize,
}

impl VecOperator {
    pub fn from_vector(data: DVector<C64>) -> Result<Self> {
        let len = data.len();
        let side = (len as f64).sqrt().round() as usize;
        if side * side != len {
            return Err(shape(format!("vectorized operator length {len} is not a perfect square")));
        }
        Ok(Self { data, side })
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.data
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.data
    }

    /// Side length `d` of the underlying `d × d` operator.
    pub fn side(&self) -> usize {
        self.side
    }

    /// `⟨⟨self|other⟩⟩`.
    pub fn inner(&self, other: &VecOperator) -> C64 {
        self.data.dotc(&other.data)
    }
}

pub fn vectorize(a: &CMatrix) -> Result<VecOperator> {
    let d = ensure_square(a, "vectorized operator")?;
    // nalgebra stores column-major, which is exactly column stacking.
    Ok(VecOperator { data: DVector::from_column_slice(a.as_slice()), side: d })
}

pub fn devectorize(v: &VecOperator) -> CMatrix {
    CMatrix::from_column_slice(v.side, v.side, v.data.as_slice())
}

/// Superoperator matrix of `A ↦ B·A·C`, i.e. `Cᵀ ⊗ B`.
pub fn vec_product_map(b: &CMatrix, c: &CMatrix) -> CMatrix {
    tensor(&c.transpose(), b)
}

/// Applies a `d² × d²` superoperator matrix to a `d × d` operator.
pub fn apply_superoperator(s: &CMatrix, a: &CMatrix) -> Result<CMatrix> {
    let v = vectorize(a)?;
    if s.ncols() != v.data.len() || s.nrows() != v.data.len() {
        return Err(shape(format!(
            "superoperator is {}x{} but operator vectorizes to length {}",
            s.nrows(),
            s.ncols(),
            v.data.len()
        )));
    }
    Ok(devectorize(&VecOperator { data: s * &v.data, side: v.side }))
}
