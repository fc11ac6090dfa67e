//! Channels from Stinespring dilations, Kraus operators, Landauer bounds and
//! the heat statistics of a thermal environment.

use crate::error::{contract, shape, Result};
use crate::linalg::{
    eig_hermitian, hermitian_part, hs_norm, identity, is_unitary, partial_trace, tensor, trace, CMatrix,
    Subsystem,
};
use crate::state::{
    gibbs_state, relative_entropy, spectrum_entropy, validate_distribution, von_neumann_entropy, DensityMatrix,
    ThermoContext,
};

/// Completeness tolerance accepted by [`KrausSet::new`].
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Tolerance on unitarity of dilation operators.
pub const UNITARY_TOL: f64 = 1e-10;

/// Environment or system eigenvalues at or below this produce no Kraus operator.
const WEIGHT_CUTOFF: f64 = 1e-15;

/// Final joint states of a conditional reset must agree to within this.
pub const FINAL_STATE_TOL: f64 = 1e-8;

/// Slack when comparing simulated dissipation to a bound.
pub const BOUND_TOL: f64 = 1e-9;

/// Unitary `U` on `S ⊗ E` with a fixed initial environment state.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationSpec {
    d_s: usize,
    d_e: usize,
    u: CMatrix,
    env_state: DensityMatrix,
}

impl DilationSpec {
    pub fn new(d_s: usize, u: CMatrix, env_state: DensityMatrix) -> Result<Self> {
        let d_e = env_state.dim();
        check_joint_unitary(&u, d_s, d_e)?;
        Ok(Self { d_s, d_e, u, env_state })
    }

    /// Environment prepared in the Gibbs state of `env`.
    pub fn thermal(d_s: usize, u: CMatrix, env: &ThermoContext) -> Result<Self> {
        Self::new(d_s, u, gibbs_state(env))
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_s, self.d_e)
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.u
    }

    pub fn env_state(&self) -> &DensityMatrix {
        &self.env_state
    }

    fn check_system(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.d_s {
            return Err(shape(format!("system state has dimension {}, dilation expects {}", rho.dim(), self.d_s)));
        }
        Ok(())
    }

    /// `U (ρ_S ⊗ ρ_E) U†`.
    pub fn joint_final(&self, rho_s: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_system(rho_s)?;
        let joint = tensor(rho_s.matrix(), self.env_state.matrix());
        Ok(DensityMatrix::from_validated(hermitian_part(&(&self.u * joint * self.u.adjoint()))))
    }
}

fn check_joint_unitary(u: &CMatrix, d_s: usize, d_e: usize) -> Result<()> {
    let n = d_s * d_e;
    if u.nrows() != n || u.ncols() != n {
        return Err(shape(format!("dilation unitary is {}x{}, expected {n}x{n}", u.nrows(), u.ncols())));
    }
    if !is_unitary(u, UNITARY_TOL) {
        return Err(contract("dilation operator is not unitary"));
    }
    Ok(())
}

/// Operators `{M}` with `Σ M†M = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let d = operators.first().map(|m| m.nrows()).ok_or_else(|| contract("Kraus set is empty"))?;
        if operators.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(shape("Kraus operators must all be square of the same size"));
        }
        let set = Self { operators };
        let residual = set.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(contract(format!("Kraus completeness residual {residual:.3e}")));
        }
        Ok(set)
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `‖Σ M†M − I‖`.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let sum = self.operators.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m.adjoint() * m);
        hs_norm(&(sum - identity(d)))
    }
}

/// `Tr_E[U (ρ_S ⊗ ρ_E) U†]`.
pub fn apply_dilation(spec: &DilationSpec, rho_s: &DensityMatrix) -> Result<DensityMatrix> {
    let joint = spec.joint_final(rho_s)?;
    joint.partial_trace(spec.dims(), Subsystem::First)
}

/// `M_ab = √e_a (I ⊗ ⟨v_b|) U (I ⊗ |e_a⟩)` over the eigenbasis `{e_a}` of the
/// environment state and an output basis `{v_b}` given by the columns of
/// `env_output_basis` (computational basis when `None`).
pub fn extract_system_kraus(spec: &DilationSpec, env_output_basis: Option<&CMatrix>) -> Result<KrausSet> {
    let (d_s, d_e) = spec.dims();
    let out_basis = output_basis(env_output_basis, d_e)?;
    let env = eig_hermitian(spec.env_state.matrix())?;
    let id = identity(d_s);
    let mut ops = Vec::new();
    for (a, &weight) in env.values.iter().enumerate() {
        if weight <= WEIGHT_CUTOFF {
            continue;
        }
        let ket = tensor(&id, &column(&env.vectors, a));
        let right = &spec.u * ket;
        for b in 0..d_e {
            let bra = tensor(&id, &column(&out_basis, b).adjoint());
            ops.push((&bra * &right).scale(weight.sqrt()));
        }
    }
    KrausSet::new(ops)
}

/// `N_cd = √s_c (⟨w_d| ⊗ I) U (|s_c⟩ ⊗ I)` over the eigenbasis of `rho_s` and
/// an output basis of the system (computational when `None`).
pub fn extract_env_kraus(
    u: &CMatrix,
    rho_s: &DensityMatrix,
    dims: (usize, usize),
    sys_output_basis: Option<&CMatrix>,
) -> Result<KrausSet> {
    let (d_s, d_e) = dims;
    if rho_s.dim() != d_s {
        return Err(shape("system state dimension does not match the dilation"));
    }
    check_joint_unitary(u, d_s, d_e)?;
    let out_basis = output_basis(sys_output_basis, d_s)?;
    let sys = eig_hermitian(rho_s.matrix())?;
    let id = identity(d_e);
    let mut ops = Vec::new();
    for (c, &weight) in sys.values.iter().enumerate() {
        if weight <= WEIGHT_CUTOFF {
            continue;
        }
        let right = u * tensor(&column(&sys.vectors, c), &id);
        for d in 0..d_s {
            let bra = tensor(&column(&out_basis, d).adjoint(), &id);
            ops.push((&bra * &right).scale(weight.sqrt()));
        }
    }
    KrausSet::new(ops)
}

fn output_basis(basis: Option<&CMatrix>, d: usize) -> Result<CMatrix> {
    match basis {
        None => Ok(identity(d)),
        Some(b) => {
            if b.nrows() != d || b.ncols() != d {
                return Err(shape(format!("output basis must be {d}x{d}")));
            }
            if !is_unitary(b, UNITARY_TOL) {
                return Err(contract("output basis is not orthonormal"));
            }
            Ok(b.clone())
        }
    }
}

fn column(m: &CMatrix, k: usize) -> CMatrix {
    m.columns(k, 1).into_owned()
}

/// `Σ M ρ M†`.
pub fn apply_kraus(k: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != k.dim() {
        return Err(shape(format!("state has dimension {}, Kraus operators are {}", rho.dim(), k.dim())));
    }
    let d = k.dim();
    let out = k.operators.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m * rho.matrix() * m.adjoint());
    Ok(DensityMatrix::from_validated(hermitian_part(&out)))
}

/// `‖Σ N N† − I‖`, zero exactly for unital channels.
pub fn non_unitality(k: &KrausSet) -> f64 {
    let d = k.dim();
    let sum = k.operators.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m * m.adjoint());
    hs_norm(&(sum - identity(d)))
}

/// Minimum environment energy increase `−T (S(out) − S(in))` for a known
/// initial state.
pub fn conditional_landauer_bound(rho_in: &DensityMatrix, rho_out: &DensityMatrix, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    Ok(-temperature * (von_neumann_entropy(rho_out) - von_neumann_entropy(rho_in)))
}

fn check_temperature(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(contract(format!("temperature must be finite and positive, got {t}")))
    }
}

/// Which reset unitaries a scenario uses.
#[derive(Debug, Clone, PartialEq)]
pub enum ResetMode {
    /// One unitary per initial state, chosen with knowledge of the state.
    Conditional(Vec<CMatrix>),
    /// One unitary applied regardless of the initial state.
    Unconditional(CMatrix),
}

/// Reset of an ensemble `{p_ℓ, ρ_ℓ}` to `ρ_r` using a thermal environment.
#[derive(Debug, Clone, PartialEq)]
pub struct ResetScenario {
    states: Vec<(f64, DensityMatrix)>,
    target: DensityMatrix,
    env_ctx: ThermoContext,
    mode: ResetMode,
}

impl ResetScenario {
    pub fn new(
        states: Vec<(f64, DensityMatrix)>,
        target: DensityMatrix,
        env_ctx: ThermoContext,
        mode: ResetMode,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(contract("reset scenario has no initial states"));
        }
        let probs: Vec<f64> = states.iter().map(|s| s.0).collect();
        validate_distribution(&probs, 1e-9)?;
        let d_s = target.dim();
        if states.iter().any(|(_, r)| r.dim() != d_s) {
            return Err(shape("initial states and target have different dimensions"));
        }
        check_temperature(env_ctx.temperature())?;
        let d_e = env_ctx.dim();
        match &mode {
            ResetMode::Conditional(us) => {
                if us.len() != states.len() {
                    return Err(shape(format!("{} conditional unitaries for {} states", us.len(), states.len())));
                }
                for u in us {
                    check_joint_unitary(u, d_s, d_e)?;
                }
            }
            ResetMode::Unconditional(u) => check_joint_unitary(u, d_s, d_e)?,
        }
        Ok(Self { states, target, env_ctx, mode })
    }

    pub fn states(&self) -> &[(f64, DensityMatrix)] {
        &self.states
    }

    pub fn target(&self) -> &DensityMatrix {
        &self.target
    }

    pub fn env_ctx(&self) -> &ThermoContext {
        &self.env_ctx
    }

    pub fn mode(&self) -> &ResetMode {
        &self.mode
    }

    pub fn is_conditional(&self) -> bool {
        matches!(self.mode, ResetMode::Conditional(_))
    }

    fn unitary_for(&self, l: usize) -> &CMatrix {
        match &self.mode {
            ResetMode::Conditional(us) => &us[l],
            ResetMode::Unconditional(u) => u,
        }
    }

    /// `Σ p_ℓ ΔS_ℓ` with `ΔS_ℓ = S(ρ_r) − S(ρ_ℓ)`.
    fn mean_entropy_change(&self) -> f64 {
        let s_r = von_neumann_entropy(&self.target);
        self.states.iter().map(|(p, r)| p * (s_r - von_neumann_entropy(r))).sum()
    }

    /// Shannon entropy of the ensemble weights, the information erased.
    pub fn erased_information(&self) -> f64 {
        spectrum_entropy(&self.states.iter().map(|s| s.0).collect::<Vec<_>>())
    }
}

/// `−T Σ p_ℓ ΔS_ℓ`: the average of the conditional bounds.
pub fn conditional_average_bound(scenario: &ResetScenario, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    Ok(-temperature * scenario.mean_entropy_change())
}

/// `−T (Σ p_ℓ ΔS_ℓ − H(p))`.
pub fn unconditional_landauer_bound(scenario: &ResetScenario, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    Ok(-temperature * (scenario.mean_entropy_change() - scenario.erased_information()))
}

/// Outcome of [`simulate_reset`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResetReport {
    /// Environment energy increase for each initial state.
    pub per_state: Vec<f64>,
    pub average: f64,
    pub bound: f64,
    pub satisfied: bool,
    /// Largest trace distance between a final system state and the target.
    pub target_error: f64,
}

/// Runs every initial state through its reset unitary with the environment
/// starting in its Gibbs state.
pub fn simulate_reset(scenario: &ResetScenario) -> Result<ResetReport> {
    let env = &scenario.env_ctx;
    let tau = gibbs_state(env);
    let e0 = env.hamiltonian.expectation(&tau)?;
    let d_s = scenario.target.dim();
    let dims = (d_s, env.dim());
    let mut per_state = Vec::with_capacity(scenario.states.len());
    let mut finals: Vec<DensityMatrix> = Vec::with_capacity(scenario.states.len());
    let mut target_error: f64 = 0.0;
    for (l, (_, rho)) in scenario.states.iter().enumerate() {
        let spec = DilationSpec { d_s, d_e: env.dim(), u: scenario.unitary_for(l).clone(), env_state: tau.clone() };
        let joint = spec.joint_final(rho)?;
        let env_final = joint.partial_trace(dims, Subsystem::Second)?;
        let sys_final = joint.partial_trace(dims, Subsystem::First)?;
        per_state.push(env.hamiltonian.expectation(&env_final)? - e0);
        target_error = target_error.max(sys_final.trace_distance(&scenario.target)?);
        finals.push(joint);
    }
    let temperature = env.temperature();
    let bound = if scenario.is_conditional() {
        let reference = &finals[0];
        for (l, f) in finals.iter().enumerate().skip(1) {
            let gap = hs_norm(&(f.matrix() - reference.matrix()));
            if gap > FINAL_STATE_TOL {
                return Err(contract(format!("conditional reset of state {l} ends in a different joint state (gap {gap:.3e})")));
            }
        }
        conditional_average_bound(scenario, temperature)?
    } else {
        unconditional_landauer_bound(scenario, temperature)?
    };
    let average: f64 = scenario.states.iter().zip(&per_state).map(|((p, _), e)| p * e).sum();
    Ok(ResetReport { satisfied: average >= bound - BOUND_TOL, per_state, average, bound, target_error })
}

/// Full swap of two equal-dimension subsystems.
pub fn swap_unitary(d: usize) -> CMatrix {
    let mut u = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            u[(j * d + i, i * d + j)] = crate::linalg::c64(1.0, 0.0);
        }
    }
    u
}

/// `P ⊗ I_E` where `P` transposes system basis states `from` and `to`.
pub fn basis_transposition_reset(d_s: usize, d_e: usize, from: usize, to: usize) -> Result<CMatrix> {
    if from >= d_s || to >= d_s {
        return Err(shape(format!("basis indices {from}, {to} out of range for dimension {d_s}")));
    }
    let mut p = identity(d_s);
    p.swap_columns(from, to);
    Ok(tensor(&p, &identity(d_e)))
}

/// Moment-generating function `⟨e^{−βQ}⟩ = Σ Tr[N N† τ_E]`.
pub fn heat_mgf(env_kraus: &KrausSet, tau_e: &DensityMatrix) -> Result<f64> {
    if tau_e.dim() != env_kraus.dim() {
        return Err(shape("environment state and Kraus operators differ in dimension"));
    }
    let d = env_kraus.dim();
    let sum = env_kraus.operators.iter().fold(CMatrix::zeros(d, d), |acc, n| acc + n * n.adjoint());
    Ok(trace(&(sum * tau_e.matrix())).re)
}

/// Same quantity evaluated on the system side: `Tr[(I ⊗ τ_E) U (ρ_S ⊗ I) U†]`.
pub fn heat_mgf_system_side(
    u: &CMatrix,
    rho_s: &DensityMatrix,
    tau_e: &DensityMatrix,
) -> Result<f64> {
    let (d_s, d_e) = (rho_s.dim(), tau_e.dim());
    check_joint_unitary(u, d_s, d_e)?;
    let inner = u * tensor(rho_s.matrix(), &identity(d_e)) * u.adjoint();
    Ok(trace(&(tensor(&identity(d_s), tau_e.matrix()) * inner)).re)
}

/// Lower bound `−T ln ⟨e^{−βQ}⟩` on the mean dissipated heat.
pub fn jensen_bound(mgf: f64, temperature: f64) -> Result<f64> {
    check_temperature(temperature)?;
    if mgf.is_nan() || mgf <= 0.0 {
        return Err(contract(format!("moment-generating function must be positive, got {mgf}")));
    }
    Ok(-temperature * mgf.ln())
}

/// Terms of the identity `βQ = −ΔS_S + I(S':E') + S(ρ_E'‖τ_E)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatDecomposition {
    /// `S(ρ_S') − S(ρ_S)`.
    pub delta_s_s: f64,
    pub mutual_information: f64,
    pub relative_entropy_env: f64,
    /// `β Tr[(ρ_E' − τ_E) H_E]`, computed from energies.
    pub beta_q: f64,
}

impl HeatDecomposition {
    pub fn residual(&self) -> f64 {
        self.beta_q + self.delta_s_s - self.mutual_information - self.relative_entropy_env
    }
}

fn check_thermal_env(spec: &DilationSpec, env: &ThermoContext) -> Result<DensityMatrix> {
    if env.dim() != spec.d_e {
        return Err(shape("environment Hamiltonian does not match the dilation"));
    }
    let tau = gibbs_state(env);
    if hs_norm(&(tau.matrix() - spec.env_state.matrix())) > 1e-9 {
        return Err(contract("environment does not start in the Gibbs state of its Hamiltonian"));
    }
    Ok(tau)
}

pub fn heat_decomposition(spec: &DilationSpec, rho_s: &DensityMatrix, env: &ThermoContext) -> Result<HeatDecomposition> {
    let tau = check_thermal_env(spec, env)?;
    check_temperature(env.temperature())?;
    let joint = spec.joint_final(rho_s)?;
    let sys = joint.partial_trace(spec.dims(), Subsystem::First)?;
    let envf = joint.partial_trace(spec.dims(), Subsystem::Second)?;
    let delta_s_s = von_neumann_entropy(&sys) - von_neumann_entropy(rho_s);
    let mutual_information = von_neumann_entropy(&sys) + von_neumann_entropy(&envf) - von_neumann_entropy(&joint);
    let relative_entropy_env = relative_entropy(&envf, &tau)?;
    let h = &env.hamiltonian;
    let beta_q = env.beta * (h.expectation(&envf)? - h.expectation(&tau)?);
    Ok(HeatDecomposition { delta_s_s, mutual_information, relative_entropy_env, beta_q })
}

/// `Δ(S_E − β U_E)` for an initially thermal environment; never positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartoviCheck {
    pub value: f64,
    pub holds: bool,
}

pub fn partovi_check(spec: &DilationSpec, rho_s: &DensityMatrix, env: &ThermoContext) -> Result<PartoviCheck> {
    let tau = check_thermal_env(spec, env)?;
    let joint = spec.joint_final(rho_s)?;
    let envf = joint.partial_trace(spec.dims(), Subsystem::Second)?;
    let h = &env.hamiltonian;
    let value = von_neumann_entropy(&envf) - von_neumann_entropy(&tau)
        - env.beta * (h.expectation(&envf)? - h.expectation(&tau)?);
    Ok(PartoviCheck { value, holds: value <= BOUND_TOL })
}

/// `Tr_S[U (ρ_S ⊗ ρ_E) U†]`.
pub fn env_final_state(spec: &DilationSpec, rho_s: &DensityMatrix) -> Result<DensityMatrix> {
    DensityMatrix::new(partial_trace(spec.joint_final(rho_s)?.matrix(), spec.dims(), Subsystem::Second)?)
}
