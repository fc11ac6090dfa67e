//! Lindblad generators in column-stacked form: propagation, asymptotic
//! projection, four-corners decomposition and DFS structure.

use crate::compmodel::BasisPartition;
use crate::error::{contract, shape, Error, Result};
use crate::linalg::{
    c64, eig_general, eig_hermitian, eigenvalues_general, expm_taylor, hermitian_part, hs_norm, identity,
    matrix_exp, numerical_rank, support_projector, vec_product_map, vectorize, CMatrix, GeneralEigen, C64,
};
use crate::state::{DensityMatrix, Hamiltonian};

/// Relative gate `|Re λ| ≤ tol · max(1, spectral radius)` for asymptotic eigenvalues.
pub const ASYMPTOTIC_TOL: f64 = 1e-8;

/// Eigenvalues of `P∞|I/d⟩⟩` above this span `P_A`.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

/// Trace drift allowed along a propagation.
pub const TRACE_TOL: f64 = 1e-9;

/// Most negative eigenvalue allowed in a propagated state.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Eigenvector condition above which propagation avoids the spectral route.
const SPECTRAL_PROPAGATION_CONDITION: f64 = 1e4;

/// Cross-block tolerance relative to `max(1, ‖op‖)`.
pub const BLOCK_TOL: f64 = 1e-10;

/// Residual coherence fraction below which dephasing counts as complete.
pub const CLASSICAL_FRACTION: f64 = 1e-6;

/// Hamiltonian plus weighted jump operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Lindbladian {
    hamiltonian: Hamiltonian,
    jumps: Vec<(CMatrix, f64)>,
}

impl Lindbladian {
    pub fn new(hamiltonian: Hamiltonian, jumps: Vec<(CMatrix, f64)>) -> Result<Self> {
        let d = hamiltonian.dim();
        for (k, (f, rate)) in jumps.iter().enumerate() {
            if f.nrows() != d || f.ncols() != d {
                return Err(shape(format!("jump {k} is {}x{}, expected {d}x{d}", f.nrows(), f.ncols())));
            }
            crate::linalg::ensure_finite(f)?;
            if !rate.is_finite() || *rate < 0.0 {
                return Err(contract(format!("jump {k} has rate {rate}, expected a finite value >= 0")));
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[(CMatrix, f64)] {
        &self.jumps
    }
}

/// A `d² × d²` matrix acting on column-stacked operators.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperoperatorMatrix {
    matrix: CMatrix,
}

impl SuperoperatorMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n = crate::linalg::ensure_square(&matrix, "superoperator")?;
        let d = (n as f64).sqrt().round() as usize;
        if d * d != n {
            return Err(shape(format!("superoperator side {n} is not a perfect square")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Dimension `d` of the operators acted on.
    pub fn operator_dim(&self) -> usize {
        (self.matrix.nrows() as f64).sqrt().round() as usize
    }

    pub fn apply(&self, a: &CMatrix) -> Result<CMatrix> {
        crate::linalg::apply_superoperator(&self.matrix, a)
    }

    /// `‖⟨⟨I| L‖`, zero for trace-preserving generators.
    pub fn trace_functional_residual(&self) -> f64 {
        let id = vectorize(&identity(self.operator_dim())).expect("square").into_vector();
        (id.adjoint() * &self.matrix).norm()
    }
}

fn minus_i() -> C64 {
    c64(0.0, -1.0)
}

/// `−i(H⊗… commutator) + Σ κ (F·F† sandwich − ½ anticommutator with F†F)`.
pub fn build_superoperator(l: &Lindbladian) -> SuperoperatorMatrix {
    let d = l.dim();
    let id = identity(d);
    let h = l.hamiltonian.matrix();
    let mut m = (vec_product_map(h, &id) - vec_product_map(&id, h)) * minus_i();
    for (f, rate) in &l.jumps {
        let fd = f.adjoint();
        let fdf = &fd * f;
        let term = vec_product_map(f, &fd) - (vec_product_map(&fdf, &id) + vec_product_map(&id, &fdf)).scale(0.5);
        m += term.scale(*rate);
    }
    SuperoperatorMatrix { matrix: m }
}

/// Heisenberg-picture generator, the Hilbert-Schmidt adjoint of [`build_superoperator`].
pub fn build_adjoint_superoperator(l: &Lindbladian) -> SuperoperatorMatrix {
    let d = l.dim();
    let id = identity(d);
    let h = l.hamiltonian.matrix();
    let mut m = (vec_product_map(h, &id) - vec_product_map(&id, h)) * c64(0.0, 1.0);
    for (f, rate) in &l.jumps {
        let fd = f.adjoint();
        let fdf = &fd * f;
        let term = vec_product_map(&fd, f) - (vec_product_map(&fdf, &id) + vec_product_map(&id, &fdf)).scale(0.5);
        m += term.scale(*rate);
    }
    SuperoperatorMatrix { matrix: m }
}

/// Cached generator for repeated propagation.
pub struct Propagator {
    generator: SuperoperatorMatrix,
    spectral: Option<GeneralEigen>,
}

impl Propagator {
    pub fn new(l: &Lindbladian) -> Self {
        let generator = build_superoperator(l);
        let spectral = eig_general(generator.matrix()).ok().filter(|e| e.condition <= SPECTRAL_PROPAGATION_CONDITION);
        Self { generator, spectral }
    }

    pub fn generator(&self) -> &SuperoperatorMatrix {
        &self.generator
    }

    /// `e^{tL}` as a matrix.
    pub fn semigroup(&self, t: f64) -> CMatrix {
        match &self.spectral {
            Some(eig) => eig.map(|z| (z * t).exp()),
            None => expm_taylor(&self.generator.matrix.scale(t)),
        }
    }

    pub fn propagate(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if !t.is_finite() || t < 0.0 {
            return Err(contract(format!("propagation time must be finite and >= 0, got {t}")));
        }
        if rho0.dim() != self.generator.operator_dim() {
            return Err(shape("state dimension does not match the generator"));
        }
        if t == 0.0 {
            return Ok(rho0.clone());
        }
        let out = crate::linalg::apply_superoperator(&self.semigroup(t), rho0.matrix())?;
        check_health(out, t)
    }
}

fn check_health(out: CMatrix, t: f64) -> Result<DensityMatrix> {
    let tr = crate::linalg::trace(&out);
    if !((tr.re - 1.0).abs() <= TRACE_TOL && tr.im.abs() <= TRACE_TOL) {
        return Err(Error::NumericHealth(format!("trace drifted to {tr} at t = {t}")));
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericHealth(format!("non-finite state at t = {t}")));
    }
    let out = hermitian_part(&out);
    let min = eig_hermitian(&out)?.values.first().copied().unwrap_or(0.0);
    if min < -POSITIVITY_TOL {
        return Err(Error::NumericHealth(format!("eigenvalue {min:.3e} at t = {t}")));
    }
    Ok(DensityMatrix::from_validated(out))
}

/// `devec(e^{tL} |ρ₀⟩⟩)`.
pub fn propagate(l: &Lindbladian, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    Propagator::new(l).propagate(rho0, t)
}

/// States at each of the given times.
pub fn trajectory(l: &Lindbladian, rho0: &DensityMatrix, times: &[f64]) -> Result<Vec<DensityMatrix>> {
    let p = Propagator::new(l);
    times.iter().map(|&t| p.propagate(rho0, t)).collect()
}

/// `n` equally spaced times from 0 to `t_max` inclusive.
pub fn uniform_times(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    }
}

/// How the asymptotic projection was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionMethod {
    Spectral,
    /// Generator failed the diagonalizability gate; time averaging was used.
    Cesaro { horizon_times_gap: u64 },
}

/// Spectral data of a generator and its asymptotic structure.
#[derive(Debug, Clone)]
pub struct AsymptoticDecomposition {
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors (columns); absent on the time-averaging path.
    pub right: Option<CMatrix>,
    /// Left eigenvectors (columns) with `q_a† p_b = δ_ab`.
    pub left: Option<CMatrix>,
    pub asymptotic: Vec<usize>,
    pub p_inf: SuperoperatorMatrix,
    pub p_a: CMatrix,
    pub q: CMatrix,
    pub tol: f64,
    pub method: ProjectionMethod,
}

impl AsymptoticDecomposition {
    pub fn dim(&self) -> usize {
        self.p_a.nrows()
    }

    /// Distinct imaginary parts of the asymptotic eigenvalues.
    pub fn frequencies(&self) -> Vec<f64> {
        cluster(self.asymptotic.iter().map(|&a| self.eigenvalues[a].im).collect(), self.tol * self.scale())
    }

    fn scale(&self) -> f64 {
        spectral_scale(&self.eigenvalues)
    }
}

fn spectral_scale(values: &[C64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

fn cluster(mut xs: Vec<f64>, tol: f64) -> Vec<f64> {
    xs.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<(f64, usize)> = Vec::new();
    for x in xs {
        match out.last_mut() {
            Some((mean, n)) if (x - *mean).abs() <= tol => {
                *mean = (*mean * *n as f64 + x) / (*n as f64 + 1.0);
                *n += 1;
            }
            _ => out.push((x, 1)),
        }
    }
    out.into_iter().map(|(m, _)| m).collect()
}

fn check_stability(values: &[C64], generator: &CMatrix) -> Result<()> {
    let bound = 1e-8 * hs_norm(generator).max(1.0);
    if let Some(z) = values.iter().find(|z| z.re > bound) {
        return Err(Error::NumericHealth(format!("generator has growing mode {z}")));
    }
    Ok(())
}

/// Spectral analysis with `P∞ = Σ_{asymptotic a} |p_a⟩⟩⟨⟨q_a|`. Falls back to
/// time averaging when the generator fails the diagonalizability gate.
pub fn decompose(l: &Lindbladian, tol: f64) -> Result<AsymptoticDecomposition> {
    let generator = build_superoperator(l);
    let m = generator.matrix();
    if crate::linalg::ensure_finite(m).is_err() {
        return Err(Error::NumericHealth("generator has non-finite entries".into()));
    }
    match eig_general(m) {
        Ok(eig) => {
            check_stability(&eig.values, m)?;
            let gate = tol * spectral_scale(&eig.values);
            let asymptotic: Vec<usize> = (0..eig.values.len()).filter(|&a| eig.values[a].re.abs() <= gate).collect();
            let n = m.nrows();
            let mut p = CMatrix::zeros(n, n);
            for &a in &asymptotic {
                p += eig.right.column(a) * eig.left.column(a).adjoint();
            }
            let p_inf = SuperoperatorMatrix { matrix: p };
            let (p_a, q) = support_projectors(&p_inf, l.dim())?;
            Ok(AsymptoticDecomposition {
                eigenvalues: eig.values,
                right: Some(eig.right),
                left: Some(eig.left),
                asymptotic,
                p_inf,
                p_a,
                q,
                tol,
                method: ProjectionMethod::Spectral,
            })
        }
        Err(Error::NonDiagonalizable { .. }) => decompose_by_averaging(l, &generator, tol),
        Err(e) => Err(e),
    }
}

/// Multiple of the inverse spectral gap used as the averaging horizon.
const FALLBACK_HORIZON_TIMES_GAP: u64 = 1_000_000;

fn decompose_by_averaging(
    l: &Lindbladian,
    generator: &SuperoperatorMatrix,
    tol: f64,
) -> Result<AsymptoticDecomposition> {
    let m = generator.matrix();
    let values = eigenvalues_general(m)?;
    check_stability(&values, m)?;
    let scale = spectral_scale(&values);
    let gate = tol * scale;
    let asymptotic: Vec<usize> = (0..values.len()).filter(|&a| values[a].re.abs() <= gate).collect();
    let freqs = cluster(asymptotic.iter().map(|&a| values[a].im).collect(), gate.max(1e-6 * scale));
    // Asymptotic blocks must be diagonal: geometric multiplicity equals the
    // number of eigenvalues in each cluster.
    let n = m.nrows();
    for &w in &freqs {
        let algebraic = asymptotic.iter().filter(|&&a| (values[a].im - w).abs() <= gate.max(1e-6 * scale)).count();
        let shifted = m - CMatrix::identity(n, n) * c64(0.0, w);
        let geometric = n - numerical_rank(&shifted, 1e-7);
        if geometric != algebraic {
            return Err(Error::NumericHealth(format!(
                "asymptotic eigenvalue {w}i has a nontrivial Jordan block ({geometric} of {algebraic} eigenvectors)"
            )));
        }
    }
    let gap = values.iter().map(|z| z.re.abs()).filter(|&r| r > gate).fold(f64::INFINITY, f64::min);
    let horizon = if gap.is_finite() { FALLBACK_HORIZON_TIMES_GAP as f64 / gap } else { 1.0 };
    // The average is P∞ + E with P∞E = EP∞ = 0, so squaring sends E to E².
    let mut p = cesaro_at(m, &freqs, horizon, 1 << 16)?.matrix;
    for _ in 0..4 {
        p = &p * &p;
    }
    let p_inf = SuperoperatorMatrix { matrix: p };
    let (p_a, q) = support_projectors(&p_inf, l.dim())?;
    Ok(AsymptoticDecomposition {
        eigenvalues: values,
        right: None,
        left: None,
        asymptotic,
        p_inf,
        p_a,
        q,
        tol,
        method: ProjectionMethod::Cesaro { horizon_times_gap: FALLBACK_HORIZON_TIMES_GAP },
    })
}

/// `P_A` = support of `P∞(I/d)`, and `Q = I − P_A`.
fn support_projectors(p_inf: &SuperoperatorMatrix, d: usize) -> Result<(CMatrix, CMatrix)> {
    let steady = p_inf.apply(&identity(d).unscale(d as f64))?;
    let p_a = support_projector(&hermitian_part(&steady), SUPPORT_THRESHOLD)?;
    let q = identity(d) - &p_a;
    Ok((p_a, q))
}

/// Time average `(1/T) ∫₀ᵀ e^{t(L − iΛ)} dt` summed over the asymptotic
/// frequencies `Λ` detected from the Schur spectrum. Each of the `samples`
/// subintervals is integrated exactly.
pub fn cesaro_projector(l: &Lindbladian, horizon: f64, samples: usize) -> Result<SuperoperatorMatrix> {
    let generator = build_superoperator(l);
    let m = generator.matrix();
    let values = eigenvalues_general(m)?;
    let scale = spectral_scale(&values);
    let gate = ASYMPTOTIC_TOL * scale;
    let freqs =
        cluster(values.iter().filter(|z| z.re.abs() <= gate).map(|z| z.im).collect(), gate.max(1e-6 * scale));
    cesaro_at(m, &freqs, horizon, samples)
}

/// Time average for an explicit frequency set.
pub fn cesaro_projector_at(
    l: &Lindbladian,
    frequencies: &[f64],
    horizon: f64,
    samples: usize,
) -> Result<SuperoperatorMatrix> {
    cesaro_at(build_superoperator(l).matrix(), frequencies, horizon, samples)
}

fn cesaro_at(m: &CMatrix, frequencies: &[f64], horizon: f64, samples: usize) -> Result<SuperoperatorMatrix> {
    if !horizon.is_finite() || horizon <= 0.0 || samples == 0 {
        return Err(contract("averaging horizon must be positive and samples nonzero"));
    }
    let n = m.nrows();
    let h = horizon / samples as f64;
    let mut total = CMatrix::zeros(n, n);
    for &w in frequencies {
        let shifted = m - CMatrix::identity(n, n) * c64(0.0, w);
        // exp([[M, I], [0, 0]] h) = [[e^{Mh}, ∫₀ʰ e^{Ms} ds], [0, I]]
        let mut aug = CMatrix::zeros(2 * n, 2 * n);
        aug.view_mut((0, 0), (n, n)).copy_from(&shifted);
        aug.view_mut((0, n), (n, n)).copy_from(&CMatrix::identity(n, n));
        let e = expm_taylor(&aug.scale(h));
        let step = e.view((0, 0), (n, n)).into_owned();
        let integral = e.view((0, n), (n, n)).into_owned();
        total += geometric_sum(&step, samples) * integral;
    }
    SuperoperatorMatrix::new(total.unscale(horizon))
}

/// `Σ_{k<n} E^k` by binary doubling.
fn geometric_sum(e: &CMatrix, n: usize) -> CMatrix {
    let d = e.nrows();
    let mut power = CMatrix::identity(d, d);
    let mut sum = CMatrix::zeros(d, d);
    for bit in (0..usize::BITS - n.leading_zeros()).rev() {
        sum = &sum + &power * &sum;
        power = &power * &power;
        if n >> bit & 1 == 1 {
            sum += &power;
            power = &power * e;
        }
    }
    sum
}

/// `e^{−iH∞s} devec(P∞|ρ⟩⟩) e^{iH∞s}`.
pub fn asymptotic_evolution(
    dec: &AsymptoticDecomposition,
    rho_in: &DensityMatrix,
    h_inf: &Hamiltonian,
    s: f64,
) -> Result<DensityMatrix> {
    let d = dec.dim();
    if rho_in.dim() != d || h_inf.dim() != d {
        return Err(shape("state or Hamiltonian dimension does not match the decomposition"));
    }
    let h = h_inf.matrix();
    let inside = &dec.p_a * h * &dec.p_a;
    if hs_norm(&(h - inside)) > 1e-10 * hs_norm(h).max(1.0) {
        return Err(contract("asymptotic Hamiltonian is not supported on the asymptotic subspace"));
    }
    let projected = dec.p_inf.apply(rho_in.matrix())?;
    let u = matrix_exp(&(h * minus_i()).scale(s));
    let out = &u * projected * u.adjoint();
    check_health(out, s)
}

/// `(P A P, P A Q, Q A P, Q A Q)` for `P = P_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourCorners {
    pub top_left: CMatrix,
    pub top_right: CMatrix,
    pub bottom_left: CMatrix,
    pub bottom_right: CMatrix,
}

impl FourCorners {
    pub fn sum(&self) -> CMatrix {
        &self.top_left + &self.top_right + &self.bottom_left + &self.bottom_right
    }
}

pub fn four_corners(a: &CMatrix, dec: &AsymptoticDecomposition) -> Result<FourCorners> {
    let d = dec.dim();
    if a.nrows() != d || a.ncols() != d {
        return Err(shape(format!("operator is {}x{}, decomposition has dimension {d}", a.nrows(), a.ncols())));
    }
    let (p, q) = (&dec.p_a, &dec.q);
    Ok(FourCorners { top_left: p * a * p, top_right: p * a * q, bottom_left: q * a * p, bottom_right: q * a * q })
}

/// Superoperator forms of the four corner maps, in [`FourCorners`] order.
pub fn corner_superprojectors(dec: &AsymptoticDecomposition) -> [SuperoperatorMatrix; 4] {
    let (p, q) = (&dec.p_a, &dec.q);
    [(p, p), (p, q), (q, p), (q, q)].map(|(b, c)| SuperoperatorMatrix { matrix: vec_product_map(b, c) })
}

fn check_partition(op: &CMatrix, partition: &BasisPartition) -> Result<()> {
    let d = partition.dim();
    if op.nrows() != d || op.ncols() != d {
        return Err(shape(format!("operator is {}x{}, partition has dimension {d}", op.nrows(), op.ncols())));
    }
    Ok(())
}

/// No cross-block entries: the operator preserves every block subspace.
pub fn dfs_commutes(op: &CMatrix, partition: &BasisPartition) -> Result<bool> {
    check_partition(op, partition)?;
    let tol = BLOCK_TOL * hs_norm(op).max(1.0);
    let d = partition.dim();
    Ok((0..d).all(|j| {
        (0..d).all(|i| partition.outcome_of(i) == partition.outcome_of(j) || op[(i, j)].norm() <= tol)
    }))
}

/// `(blockwise part, cross-block part)`; the two sum to `op` exactly.
pub fn split_comp_noncomp(op: &CMatrix, partition: &BasisPartition) -> Result<(CMatrix, CMatrix)> {
    check_partition(op, partition)?;
    let d = partition.dim();
    let noncomp = CMatrix::from_fn(d, d, |i, j| {
        if partition.outcome_of(i) == partition.outcome_of(j) {
            op[(i, j)]
        } else {
            c64(0.0, 0.0)
        }
    });
    let pure_comp = CMatrix::from_fn(d, d, |i, j| {
        if partition.outcome_of(i) == partition.outcome_of(j) {
            c64(0.0, 0.0)
        } else {
            op[(i, j)]
        }
    });
    Ok((noncomp, pure_comp))
}

/// Cross-block coherence before and after propagating for `t_resolve`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingReport {
    pub initial_coherence: f64,
    pub residual_coherence: f64,
    pub classical: bool,
}

pub fn dephasing_check(
    l: &Lindbladian,
    partition: &BasisPartition,
    rho: &DensityMatrix,
    t_resolve: f64,
) -> Result<DephasingReport> {
    check_partition(rho.matrix(), partition)?;
    let evolved = propagate(l, rho, t_resolve)?;
    let coherence = |m: &CMatrix| hs_norm(&split_comp_noncomp(m, partition).expect("dimensions checked").1);
    let initial_coherence = coherence(rho.matrix());
    let residual_coherence = coherence(evolved.matrix());
    Ok(DephasingReport {
        initial_coherence,
        residual_coherence,
        classical: residual_coherence <= CLASSICAL_FRACTION * initial_coherence,
    })
}
