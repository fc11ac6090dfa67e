//! Density matrices, thermal contexts and the entropy family.
//!
//! All entropies are natural-log (nats); `k_B = 1`, so temperatures carry
//! energy units and `T = 1/β`.

use nalgebra::DVector;

use crate::error::{contract, shape, Error, Result};
use crate::linalg::{
    eig_hermitian, ensure_finite, ensure_square, hermitian_part, hermiticity_residual, hs_norm,
    identity, is_hermitian, is_unitary, partial_trace, real_diagonal, tensor, trace, CMatrix, Subsystem,
    C64, HERMITICITY_TOL,
};

/// Trace and positivity tolerance for [`DensityMatrix::new`].
pub const STATE_TOL: f64 = 1e-10;

/// Eigenvalues at or below this are treated as outside the support.
pub const SUPPORT_TOL: f64 = 1e-14;

/// Weight of `ρ` outside `supp σ` above which a divergence is infinite.
const SUPPORT_LEAK_TOL: f64 = 1e-12;

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, STATE_TOL, STATE_TOL)
    }

    /// Validates with custom trace and negativity tolerances and stores the
    /// Hermitian part of `matrix`.
    pub fn with_tolerance(matrix: CMatrix, trace_tol: f64, negativity_tol: f64) -> Result<Self> {
        ensure_square(&matrix, "density matrix")?;
        ensure_finite(&matrix)?;
        if !is_hermitian(&matrix) {
            return Err(contract(format!(
                "density matrix is not Hermitian (residual {:.3e})",
                hermiticity_residual(&matrix)
            )));
        }
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(contract(format!("density matrix trace is {tr}, expected 1")));
        }
        let matrix = hermitian_part(&matrix);
        let min = eig_hermitian(&matrix)?.values.first().copied().unwrap_or(0.0);
        if min < -negativity_tol {
            return Err(contract(format!("density matrix has negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix })
    }

    pub fn from_populations(p: &[f64]) -> Result<Self> {
        Self::new(real_diagonal(p))
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(contract("pure state vector must be nonzero and finite"));
        }
        let psi = psi.unscale(norm);
        Self::new(&psi * psi.adjoint())
    }

    pub fn basis_state(d: usize, k: usize) -> Result<Self> {
        if k >= d {
            return Err(shape(format!("basis index {k} out of range for dimension {d}")));
        }
        let mut p = vec![0.0; d];
        p[k] = 1.0;
        Self::from_populations(&p)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { matrix: identity(d).unscale(d as f64) }
    }

    /// Convex mixture `Σ p_ℓ ρ_ℓ`.
    pub fn mixture(components: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let d = components.first().map(|(_, r)| r.dim()).ok_or_else(|| contract("empty mixture"))?;
        let mut acc = CMatrix::zeros(d, d);
        for (p, rho) in components {
            if rho.dim() != d {
                return Err(shape("mixture components have different dimensions"));
            }
            if *p < 0.0 {
                return Err(contract("mixture weights must be nonnegative"));
            }
            acc += rho.matrix.scale(*p);
        }
        Self::new(acc)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Ascending eigenvalues with the small negative noise clipped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = eig_hermitian(&self.matrix).expect("density matrices are Hermitian");
        eig.values.into_iter().map(|x| x.max(0.0)).collect()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { matrix: tensor(&self.matrix, &other.matrix) }
    }

    pub fn partial_trace(&self, dims: (usize, usize), keep: Subsystem) -> Result<DensityMatrix> {
        Self::new(partial_trace(&self.matrix, dims, keep)?)
    }

    /// Trace distance `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(shape("trace distance between states of different dimension"));
        }
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * eig_hermitian(&diff)?.values.iter().map(|x| x.abs()).sum::<f64>())
    }

    pub(crate) fn from_validated(matrix: CMatrix) -> Self {
        Self { matrix }
    }
}

/// Hermitian energy operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    matrix: CMatrix,
}

impl Hamiltonian {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        ensure_square(&matrix, "Hamiltonian")?;
        ensure_finite(&matrix)?;
        if !is_hermitian(&matrix) {
            return Err(contract(format!(
                "Hamiltonian is not Hermitian within {HERMITICITY_TOL:e} (residual {:.3e})",
                hermiticity_residual(&matrix)
            )));
        }
        Ok(Self { matrix: hermitian_part(&matrix) })
    }

    pub fn from_energies(energies: &[f64]) -> Result<Self> {
        Self::new(real_diagonal(energies))
    }

    pub fn zero(d: usize) -> Self {
        Self { matrix: CMatrix::zeros(d, d) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn energies(&self) -> Vec<f64> {
        eig_hermitian(&self.matrix).expect("Hamiltonians are Hermitian").values
    }

    /// `Tr[H ρ]`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.dim() {
            return Err(shape("state and Hamiltonian dimensions differ"));
        }
        Ok(trace(&(&self.matrix * rho.matrix())).re)
    }
}

/// A Hamiltonian together with an inverse temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoContext {
    pub hamiltonian: Hamiltonian,
    pub beta: f64,
}

impl ThermoContext {
    /// `beta = 0` is the infinite-temperature limit.
    pub fn new(hamiltonian: Hamiltonian, beta: f64) -> Result<Self> {
        if !beta.is_finite() || beta < 0.0 {
            return Err(contract(format!("inverse temperature must be finite and >= 0, got {beta}")));
        }
        Ok(Self { hamiltonian, beta })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    /// `ln Z`, evaluated with the ground energy factored out.
    pub fn log_partition_function(&self) -> f64 {
        let energies = self.hamiltonian.energies();
        let ground = energies.first().copied().unwrap_or(0.0);
        let shifted: f64 = energies.iter().map(|e| (-self.beta * (e - ground)).exp()).sum();
        -self.beta * ground + shifted.ln()
    }

    /// Equilibrium free energy `−T ln Z`.
    pub fn equilibrium_free_energy(&self) -> Result<f64> {
        require_finite_temperature(self)?;
        Ok(-self.temperature() * self.log_partition_function())
    }

    fn check_dim(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(shape(format!(
                "state dimension {} does not match Hamiltonian dimension {}",
                rho.dim(),
                self.dim()
            )));
        }
        Ok(())
    }
}

fn require_finite_temperature(ctx: &ThermoContext) -> Result<()> {
    if ctx.beta > 0.0 {
        Ok(())
    } else {
        Err(contract("free energies need a finite temperature (beta > 0)"))
    }
}

/// Thermal state `e^{−βH} / Tr e^{−βH}`.
pub fn gibbs_state(ctx: &ThermoContext) -> DensityMatrix {
    let eig = eig_hermitian(ctx.hamiltonian.matrix()).expect("Hamiltonians are Hermitian");
    let ground = eig.values.first().copied().unwrap_or(0.0);
    let weights: Vec<f64> = eig.values.iter().map(|e| (-ctx.beta * (e - ground)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let tau = eig.map(|e| (-ctx.beta * (e - ground)).exp() / z);
    DensityMatrix::from_validated(hermitian_part(&tau))
}

/// `U ρ U†`.
pub fn evolve_unitary(rho: &DensityMatrix, u: &CMatrix) -> Result<DensityMatrix> {
    if u.nrows() != rho.dim() || u.ncols() != rho.dim() {
        return Err(shape(format!("unitary is {}x{} but state has dimension {}", u.nrows(), u.ncols(), rho.dim())));
    }
    if !is_unitary(u, STATE_TOL) {
        return Err(contract("evolution operator is not unitary"));
    }
    Ok(DensityMatrix::from_validated(hermitian_part(&(u * rho.matrix() * u.adjoint()))))
}

/// Shannon entropy of a spectrum, clipping negative noise; no validation.
pub(crate) fn spectrum_entropy(values: &[f64]) -> f64 {
    -values
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

pub(crate) fn validate_distribution(p: &[f64], tol: f64) -> Result<()> {
    if p.is_empty() {
        return Err(contract("probability vector is empty"));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < -1e-12) {
        return Err(contract(format!("probability entry {x} is negative or not finite")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(contract(format!("probabilities sum to {total}, expected 1")));
    }
    Ok(())
}

/// `−Σ p ln p` with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    validate_distribution(p, 1e-9)?;
    Ok(spectrum_entropy(p))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.eigenvalues())
}

fn check_same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(shape(format!("states have dimensions {} and {}", rho.dim(), sigma.dim())));
    }
    Ok(())
}

/// Support cutoff for `m`: a diagonal matrix carries its exact spectrum, so
/// any positive entry is resolved; otherwise eigenvalues below the noise floor
/// are dropped.
fn support_cutoff(m: &CMatrix) -> f64 {
    let diagonal = (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)));
    if diagonal {
        0.0
    } else {
        SUPPORT_TOL
    }
}

/// Weight `Tr[ρ Π_ker σ]` of `ρ` outside the support of `σ`.
fn weight_outside_support(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let cutoff = support_cutoff(sigma.matrix());
    let eig = eig_hermitian(sigma.matrix())?;
    let kernel = eig.map(|x| if x > cutoff { 0.0 } else { 1.0 });
    Ok(trace(&(rho.matrix() * kernel)).re)
}

/// `M^p` on the support of a positive semidefinite `M` (zero elsewhere).
fn support_power(m: &CMatrix, p: f64) -> Result<CMatrix> {
    let cutoff = support_cutoff(m);
    let eig = eig_hermitian(m)?;
    Ok(eig.map(|x| if x > cutoff { x.powf(p) } else { 0.0 }))
}

/// Quantum relative entropy `Tr[ρ (ln ρ − ln σ)]`; `+∞` when `supp ρ ⊄ supp σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    if weight_outside_support(rho, sigma)? > SUPPORT_LEAK_TOL {
        return Ok(f64::INFINITY);
    }
    let neg_entropy = -von_neumann_entropy(rho);
    let cutoff = support_cutoff(sigma.matrix());
    let sig = eig_hermitian(sigma.matrix())?;
    let mut cross = 0.0;
    for (k, &s) in sig.values.iter().enumerate() {
        if s > cutoff {
            let v = sig.vectors.column(k);
            let w = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
            cross -= w * s.ln();
        }
    }
    Ok(neg_entropy + cross)
}

/// α-relative Rényi entropy.
///
/// `α ∈ (−1, 0) ∪ (0, 1)` uses the Petz form `sgn α/(α−1) · ln Tr[ρ^α σ^{1−α}]`,
/// `|α| > 1` uses the sandwiched form with `σ^{(1−α)/2α}` on both sides, and
/// `α = 1` is the relative entropy. Powers act on supports only.
pub fn alpha_rre(rho: &DensityMatrix, sigma: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    if !alpha.is_finite() || alpha == 0.0 || alpha == -1.0 {
        return Err(contract(format!("alpha = {alpha} is outside the defined branches")));
    }
    if alpha == 1.0 {
        return relative_entropy(rho, sigma);
    }
    let prefactor = alpha.signum() / (alpha - 1.0);
    let tr_rho = trace(rho.matrix()).re;
    let q = if alpha.abs() < 1.0 {
        let a = support_power(rho.matrix(), alpha)?;
        let b = support_power(sigma.matrix(), 1.0 - alpha)?;
        trace(&(a * b)).re
    } else {
        let gamma = (1.0 - alpha) / (2.0 * alpha);
        if gamma < 0.0 && weight_outside_support(rho, sigma)? > SUPPORT_LEAK_TOL {
            return Ok(f64::INFINITY);
        }
        let s = support_power(sigma.matrix(), gamma)?;
        let inner = hermitian_part(&(&s * rho.matrix() * &s));
        trace(&support_power(&inner, alpha)?).re
    };
    let value = prefactor * (q / tr_rho).ln();
    if value.is_nan() {
        return Err(Error::NumericHealth(format!("alpha-RRE evaluated to NaN at alpha = {alpha}")));
    }
    // ln 0 → −∞ with a negative prefactor is a genuine +∞ divergence.
    Ok(if value == f64::NEG_INFINITY { f64::INFINITY } else { value })
}

/// Nonequilibrium free energy `Tr[Hρ] − T·S(ρ)`.
pub fn helmholtz_free_energy(rho: &DensityMatrix, ctx: &ThermoContext) -> Result<f64> {
    ctx.check_dim(rho)?;
    require_finite_temperature(ctx)?;
    Ok(ctx.hamiltonian.expectation(rho)? - ctx.temperature() * von_neumann_entropy(rho))
}

/// `F_α = −T ln Z + T·S_α(ρ‖τ)`.
pub fn alpha_free_energy(rho: &DensityMatrix, ctx: &ThermoContext, alpha: f64) -> Result<f64> {
    ctx.check_dim(rho)?;
    require_finite_temperature(ctx)?;
    let tau = gibbs_state(ctx);
    let t = ctx.temperature();
    Ok(-t * ctx.log_partition_function() + t * alpha_rre(rho, &tau, alpha)?)
}

/// `I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ_AB)`.
pub fn quantum_mutual_information(rho_ab: &DensityMatrix, dims: (usize, usize)) -> Result<f64> {
    let a = rho_ab.partial_trace(dims, Subsystem::First)?;
    let b = rho_ab.partial_trace(dims, Subsystem::Second)?;
    Ok(von_neumann_entropy(&a) + von_neumann_entropy(&b) - von_neumann_entropy(rho_ab))
}

/// Frobenius norm of `[A, B]`.
pub(crate) fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    hs_norm(&(a * b - b * a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use crate::testutil::{diag_density, random_density, random_probabilities, random_unitary, rng};
    use std::f64::consts::LN_2;

    fn dm(m: CMatrix) -> DensityMatrix {
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::from_populations(&[0.5, 0.5]).is_ok());
        assert!(matches!(DensityMatrix::from_populations(&[0.7, 0.5]), Err(Error::Contract(_))));
        assert!(matches!(DensityMatrix::from_populations(&[1.5, -0.5]), Err(Error::Contract(_))));
        let mut m = real_diagonal(&[0.5, 0.5]);
        m[(0, 1)] = c64(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::Contract(_))));
    }

    #[test]
    fn gibbs_infinite_temperature() {
        let mut rng = rng(11);
        let h = Hamiltonian::new(crate::testutil::random_hermitian(&mut rng, 3)).unwrap();
        let tau = gibbs_state(&ThermoContext::new(h, 0.0).unwrap());
        assert!(hs_norm(&(tau.matrix() - identity(3).unscale(3.0))) < 1e-14);
    }

    #[test]
    fn gibbs_zero_temperature_limit() {
        let ctx = ThermoContext::new(Hamiltonian::from_energies(&[0.3, -1.0, 2.0]).unwrap(), 200.0).unwrap();
        let tau = gibbs_state(&ctx);
        assert!((tau.matrix()[(1, 1)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gibbs_two_level_population() {
        let ctx = ThermoContext::new(Hamiltonian::from_energies(&[0.0, 1.0]).unwrap(), 1.0).unwrap();
        let tau = gibbs_state(&ctx);
        let expected = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((tau.matrix()[(0, 0)].re - expected).abs() < 1e-15);
        assert!(super::commutator_norm(tau.matrix(), ctx.hamiltonian.matrix()) < 1e-14);
        assert!((ctx.log_partition_function() - (1.0 + (-1.0f64).exp()).ln()).abs() < 1e-15);
    }

    #[test]
    fn gibbs_handles_large_energies() {
        let ctx = ThermoContext::new(Hamiltonian::from_energies(&[1e4, 1e4 + 1.0]).unwrap(), 1.0).unwrap();
        let tau = gibbs_state(&ctx);
        assert!((tau.matrix()[(0, 0)].re - 1.0 / (1.0 + (-1.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn unitary_evolution_preserves_spectrum() {
        let mut rng = rng(12);
        let rho = dm(random_density(&mut rng, 4));
        assert_eq!(evolve_unitary(&rho, &identity(4)).unwrap(), rho);
        let u = random_unitary(&mut rng, 4);
        let out = evolve_unitary(&rho, &u).unwrap();
        for (a, b) in rho.eigenvalues().iter().zip(out.eigenvalues()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((von_neumann_entropy(&rho) - von_neumann_entropy(&out)).abs() < 1e-9);
        assert!(matches!(evolve_unitary(&rho, &identity(4).scale(2.0)), Err(Error::Contract(_))));
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(shannon_entropy(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.2; 5]).unwrap() - 5f64.ln()).abs() < 1e-15);
        let expected = -0.25 * 0.25f64.ln() - 0.75 * 0.75f64.ln();
        assert!((shannon_entropy(&[0.25, 0.75]).unwrap() - expected).abs() < 1e-15);
        assert!(shannon_entropy(&[0.5, 0.6]).is_err());
    }

    #[test]
    fn von_neumann_examples() {
        assert!(von_neumann_entropy(&DensityMatrix::basis_state(3, 1).unwrap()).abs() < 1e-15);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(4)) - 4f64.ln()).abs() < 1e-14);
        let mut rng = rng(13);
        let p = random_probabilities(&mut rng, 4);
        let u = random_unitary(&mut rng, 4);
        let rho = dm(&u * diag_density(&p) * u.adjoint());
        assert!((von_neumann_entropy(&rho) - shannon_entropy(&p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_examples() {
        let mut rng = rng(14);
        let rho = dm(random_density(&mut rng, 3));
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-12);

        let zero = DensityMatrix::basis_state(2, 0).unwrap();
        let one = DensityMatrix::basis_state(2, 1).unwrap();
        assert_eq!(relative_entropy(&zero, &one).unwrap(), f64::INFINITY);

        let p: [f64; 3] = [0.1, 0.6, 0.3];
        let q: [f64; 3] = [0.4, 0.4, 0.2];
        let kl: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).ln()).sum();
        let got = relative_entropy(&dm(diag_density(&p)), &dm(diag_density(&q))).unwrap();
        assert!((got - kl).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_to_a_cold_gibbs_state_is_finite() {
        let ctx = ThermoContext::new(Hamiltonian::from_energies(&[0.0, 40.0]).unwrap(), 1.0).unwrap();
        let gamma = gibbs_state(&ctx);
        assert!(gamma.matrix()[(1, 1)].re < 1e-17);
        let rho = dm(diag_density(&[0.5, 0.5]));
        let got = relative_entropy(&rho, &gamma).unwrap();
        assert!((got - (20.0 - std::f64::consts::LN_2)).abs() < 1e-12, "{got}");
        let gap = helmholtz_free_energy(&rho, &ctx).unwrap() - helmholtz_free_energy(&gamma, &ctx).unwrap();
        assert!((gap - got).abs() < 1e-12);
    }

    #[test]
    fn alpha_rre_vanishes_on_identical_states() {
        let mut rng = rng(15);
        let rho = dm(random_density(&mut rng, 3));
        for alpha in [0.5, 2.0] {
            assert!(alpha_rre(&rho, &rho, alpha).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_rre_limit_continuity() {
        let mut rng = rng(16);
        let rho = dm(random_density(&mut rng, 3));
        let sigma = dm(random_density(&mut rng, 3));
        let d = relative_entropy(&rho, &sigma).unwrap();
        for alpha in [1.0 - 1e-6, 1.0 + 1e-6] {
            assert!((alpha_rre(&rho, &sigma, alpha).unwrap() - d).abs() < 1e-4);
        }
        assert_eq!(alpha_rre(&rho, &sigma, 1.0).unwrap(), d);
    }

    #[test]
    fn alpha_rre_matches_classical_renyi() {
        let p: [f64; 3] = [0.1, 0.6, 0.3];
        let q: [f64; 3] = [0.4, 0.4, 0.2];
        let classical = |a: f64| -> f64 {
            (p.iter().zip(&q).map(|(x, y)| x.powf(a) * y.powf(1.0 - a)).sum::<f64>()).ln() / (a - 1.0)
        };
        let rho = dm(diag_density(&p));
        let sigma = dm(diag_density(&q));
        for alpha in [0.3, 0.5, 2.0, 3.0] {
            assert!((alpha_rre(&rho, &sigma, alpha).unwrap() - classical(alpha)).abs() < 1e-12);
        }
        assert!(alpha_rre(&rho, &sigma, 0.0).is_err());
        assert!(alpha_rre(&rho, &sigma, -1.0).is_err());
    }

    #[test]
    fn sandwiched_branch_detects_support_violation() {
        let rho = DensityMatrix::from_populations(&[0.5, 0.5]).unwrap();
        let sigma = DensityMatrix::basis_state(2, 0).unwrap();
        assert_eq!(alpha_rre(&rho, &sigma, 2.0).unwrap(), f64::INFINITY);
        let rho = DensityMatrix::basis_state(2, 1).unwrap();
        assert_eq!(alpha_rre(&rho, &sigma, 0.5).unwrap(), f64::INFINITY);
    }

    fn qubit_ctx() -> ThermoContext {
        ThermoContext::new(Hamiltonian::from_energies(&[0.0, 1.3]).unwrap(), 0.7).unwrap()
    }

    #[test]
    fn free_energy_identities() {
        let ctx = qubit_ctx();
        let tau = gibbs_state(&ctx);
        let f_eq = -ctx.temperature() * ctx.log_partition_function();
        assert!((helmholtz_free_energy(&tau, &ctx).unwrap() - f_eq).abs() < 1e-12);
        let ground = DensityMatrix::basis_state(2, 0).unwrap();
        assert!(helmholtz_free_energy(&ground, &ctx).unwrap().abs() < 1e-15);
        for alpha in [0.5, 1.0, 2.0, 4.0] {
            assert!((alpha_free_energy(&tau, &ctx, alpha).unwrap() - f_eq).abs() < 1e-10);
        }
        let mut rng = rng(17);
        for _ in 0..100 {
            let rho = dm(random_density(&mut rng, 2));
            let f = helmholtz_free_energy(&rho, &ctx).unwrap();
            assert!(f >= f_eq - 1e-12);
            assert!((alpha_free_energy(&rho, &ctx, 1.0).unwrap() - f).abs() < 1e-9);
        }
    }

    #[test]
    fn alpha_free_energy_monotone_on_commuting_states() {
        let ctx = ThermoContext::new(Hamiltonian::from_energies(&[0.0, 0.4, 1.1]).unwrap(), 1.2).unwrap();
        let mut rng = rng(18);
        for _ in 0..50 {
            let rho = dm(diag_density(&random_probabilities(&mut rng, 3)));
            let values: Vec<f64> =
                [0.5, 1.0, 2.0, 4.0].iter().map(|&a| alpha_free_energy(&rho, &ctx, a).unwrap()).collect();
            assert!(values.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{values:?}");
        }
    }

    #[test]
    fn free_energy_requires_finite_temperature() {
        let ctx = ThermoContext::new(Hamiltonian::zero(2), 0.0).unwrap();
        assert!(helmholtz_free_energy(&DensityMatrix::maximally_mixed(2), &ctx).is_err());
        assert!(ThermoContext::new(Hamiltonian::zero(2), -1.0).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let mut rng = rng(19);
        let a = dm(random_density(&mut rng, 2));
        let b = dm(random_density(&mut rng, 3));
        assert!(quantum_mutual_information(&a.tensor(&b), (2, 3)).unwrap().abs() < 1e-12);

        let correlated = DensityMatrix::from_populations(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((quantum_mutual_information(&correlated, (2, 2)).unwrap() - LN_2).abs() < 1e-14);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityMatrix::pure(&DVector::from_vec(vec![c64(s, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(s, 0.0)])).unwrap();
        assert!((quantum_mutual_information(&bell, (2, 2)).unwrap() - 2.0 * LN_2).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_equals_relative_entropy_form() {
        let mut rng = rng(20);
        for _ in 0..10 {
            let rho = dm(random_density(&mut rng, 6));
            let a = rho.partial_trace((2, 3), Subsystem::First).unwrap();
            let b = rho.partial_trace((2, 3), Subsystem::Second).unwrap();
            let via_divergence = relative_entropy(&rho, &a.tensor(&b)).unwrap();
            let qmi = quantum_mutual_information(&rho, (2, 3)).unwrap();
            assert!(qmi >= 0.0);
            assert!((qmi - via_divergence).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_is_additive() {
        let mut rng = rng(21);
        let a = dm(random_density(&mut rng, 3));
        let b = dm(random_density(&mut rng, 2));
        let joint = von_neumann_entropy(&a.tensor(&b));
        assert!((joint - von_neumann_entropy(&a) - von_neumann_entropy(&b)).abs() < 1e-9);
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityMatrix::basis_state(2, 0).unwrap();
        let one = DensityMatrix::basis_state(2, 1).unwrap();
        assert!((zero.trace_distance(&one).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(zero.trace_distance(&zero).unwrap(), 0.0);
    }
}
