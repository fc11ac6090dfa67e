//! Transition feasibility under thermal operations: β-ordering,
//! thermomajorization and free-energy conditions for catalytic operations.

use std::cmp::Ordering;

use crate::error::{contract, shape, Result};
use crate::linalg::{eig_hermitian, hs_norm};
use crate::state::{
    alpha_free_energy, commutator_norm, helmholtz_free_energy, validate_distribution, DensityMatrix, ThermoContext,
};

/// Curve comparison tolerance.
pub const CURVE_TOL: f64 = 1e-9;

/// Free-energy comparison tolerance.
pub const FREE_ENERGY_TOL: f64 = 1e-9;

/// Uniform samples added to the breakpoints when comparing curves.
pub const CURVE_SAMPLES: usize = 1000;

/// Finite stand-in for the `α = ∞` condition.
pub const ALPHA_CAP: f64 = 50.0;

pub const DEFAULT_ALPHAS: [f64; 9] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, ALPHA_CAP];

/// Sort key used to β-order populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderingConvention {
    /// Nonincreasing `p_i e^{βE_i}`, the slope of each curve segment. The
    /// resulting curve is concave and the Gibbs chord is its lower bound.
    #[default]
    Slope,
    /// Nonincreasing `p_i e^{−βE_i}`. Only agrees with `Slope` at `β = 0`
    /// or when populations are uniform in energy.
    BoltzmannWeighted,
}

fn check_lengths(p: &[f64], energies: &[f64]) -> Result<()> {
    if p.len() != energies.len() {
        return Err(shape(format!("{} populations but {} energies", p.len(), energies.len())));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(contract("energies must be finite"));
    }
    Ok(())
}

fn log_key(p: f64, energy: f64, beta: f64, convention: OrderingConvention) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    match convention {
        OrderingConvention::Slope => p.ln() + beta * energy,
        OrderingConvention::BoltzmannWeighted => p.ln() - beta * energy,
    }
}

/// Permutation listing indices by nonincreasing key; ties go to lower
/// energy, then lower index.
pub fn beta_order(p: &[f64], energies: &[f64], beta: f64, convention: OrderingConvention) -> Result<Vec<usize>> {
    check_lengths(p, energies)?;
    let keys: Vec<f64> = p.iter().zip(energies).map(|(&q, &e)| log_key(q, e, beta, convention)).collect();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| {
        keys[b]
            .partial_cmp(&keys[a])
            .unwrap_or(Ordering::Equal)
            .then(energies[a].partial_cmp(&energies[b]).unwrap_or(Ordering::Equal))
            .then(a.cmp(&b))
    });
    Ok(order)
}

/// Piecewise-linear curve through `(Σ e^{−βE}, Σ p)` in β-order.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermomajorizationCurve {
    pub points: Vec<(f64, f64)>,
}

impl ThermomajorizationCurve {
    /// Curve obtained by accumulating in the given order.
    pub fn from_order(p: &[f64], energies: &[f64], beta: f64, order: &[usize]) -> Result<Self> {
        check_lengths(p, energies)?;
        let mut seen = vec![false; p.len()];
        if order.len() != p.len() || order.iter().any(|&i| i >= p.len() || std::mem::replace(&mut seen[i], true)) {
            return Err(contract("order is not a permutation of the levels"));
        }
        let mut points = Vec::with_capacity(p.len() + 1);
        let (mut x, mut y) = (0.0, 0.0);
        points.push((x, y));
        for &i in order {
            x += (-beta * energies[i]).exp();
            y += p[i];
            points.push((x, y));
        }
        Ok(Self { points })
    }

    /// Partition function, the final abscissa.
    pub fn z(&self) -> f64 {
        self.points.last().map_or(0.0, |pt| pt.0)
    }

    /// Linear interpolation; constant at the final height beyond `Z`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        for w in self.points.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                return if x1 > x0 { y0 + (y1 - y0) * (x - x0) / (x1 - x0) } else { y1 };
            }
        }
        self.points.last().map_or(0.0, |pt| pt.1)
    }

    /// Segment slopes are nonincreasing within `tol`.
    pub fn is_concave(&self, tol: f64) -> bool {
        let slopes: Vec<f64> = self
            .points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        slopes.windows(2).all(|s| s[1] <= s[0] + tol)
    }
}

pub fn thermomaj_curve(
    p: &[f64],
    energies: &[f64],
    beta: f64,
    convention: OrderingConvention,
) -> Result<ThermomajorizationCurve> {
    validate_distribution(p, 1e-9)?;
    let order = beta_order(p, energies, beta, convention)?;
    ThermomajorizationCurve::from_order(p, energies, beta, &order)
}

/// Whether `p_out` lies on or below the curve of `p_in` everywhere, sampled
/// at both breakpoint sets and a uniform grid.
pub fn thermomaj_feasible(
    p_in: &[f64],
    p_out: &[f64],
    energies: &[f64],
    beta: f64,
    convention: OrderingConvention,
) -> Result<bool> {
    let upper = thermomaj_curve(p_in, energies, beta, convention)?;
    let lower = thermomaj_curve(p_out, energies, beta, convention)?;
    let z = upper.z();
    let samples = upper
        .points
        .iter()
        .chain(&lower.points)
        .map(|pt| pt.0)
        .chain((0..=CURVE_SAMPLES).map(|k| z * k as f64 / CURVE_SAMPLES as f64));
    for x in samples {
        if lower.eval(x) > upper.eval(x) + CURVE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Populations and energies of a state that commutes with the Hamiltonian,
/// in a common eigenbasis.
pub fn commuting_populations(rho: &DensityMatrix, ctx: &ThermoContext) -> Result<(Vec<f64>, Vec<f64>)> {
    let h = ctx.hamiltonian.matrix();
    if rho.dim() != h.nrows() {
        return Err(shape("state and Hamiltonian dimensions differ"));
    }
    let scale = hs_norm(h).max(1.0);
    if commutator_norm(rho.matrix(), h) > 1e-9 * scale {
        return Err(contract("state does not commute with the Hamiltonian"));
    }
    let eig = eig_hermitian(h)?;
    let d = rho.dim();
    let mut populations = Vec::with_capacity(d);
    let mut energies = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let e0 = eig.values[start];
        let mut end = start + 1;
        while end < d && (eig.values[end] - e0).abs() <= 1e-9 * scale {
            end += 1;
        }
        let v = eig.vectors.columns(start, end - start);
        let block = v.adjoint() * rho.matrix() * v;
        for x in eig_hermitian(&block)?.values {
            populations.push(x.max(0.0));
            energies.push(e0);
        }
        start = end;
    }
    Ok((populations, energies))
}

/// Helmholtz comparison for a catalytic thermal operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CtoVerdict {
    pub feasible: bool,
    pub free_energy_in: f64,
    pub free_energy_out: f64,
    /// Residual system-catalyst mutual information charged to the transition.
    pub qmi: f64,
    /// `F(in) − F(out)`; nonnegative when feasible.
    pub margin: f64,
}

pub fn cto_feasible_general(
    rho_in: &DensityMatrix,
    rho_out: &DensityMatrix,
    ctx: &ThermoContext,
    qmi_budget: f64,
) -> Result<CtoVerdict> {
    if rho_in.dim() != rho_out.dim() {
        return Err(shape("input and output states have different dimensions"));
    }
    if !qmi_budget.is_finite() || qmi_budget < 0.0 {
        return Err(contract("mutual information budget must be finite and nonnegative"));
    }
    let free_energy_in = helmholtz_free_energy(rho_in, ctx)?;
    let free_energy_out = helmholtz_free_energy(rho_out, ctx)?;
    let margin = free_energy_in - free_energy_out;
    Ok(CtoVerdict { feasible: margin >= -FREE_ENERGY_TOL, free_energy_in, free_energy_out, qmi: qmi_budget, margin })
}

/// Per-α free-energy margins `F_α(in) − F_α(out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondLawsReport {
    pub passed: bool,
    pub margins: Vec<(f64, f64)>,
}

impl SecondLawsReport {
    pub fn first_violation(&self) -> Option<f64> {
        self.margins.iter().find(|(_, m)| *m < -FREE_ENERGY_TOL).map(|(a, _)| *a)
    }
}

pub fn second_laws_check(
    rho_in: &DensityMatrix,
    rho_out: &DensityMatrix,
    ctx: &ThermoContext,
    alphas: &[f64],
) -> Result<SecondLawsReport> {
    commuting_populations(rho_in, ctx)?;
    commuting_populations(rho_out, ctx)?;
    let margins = alphas
        .iter()
        .map(|&a| Ok((a, alpha_free_energy(rho_in, ctx, a)? - alpha_free_energy(rho_out, ctx, a)?)))
        .collect::<Result<Vec<_>>>()?;
    let passed = margins.iter().all(|(_, m)| *m >= -FREE_ENERGY_TOL);
    Ok(SecondLawsReport { passed, margins })
}

/// Round trip reset → computed → reset as two chained general CTOs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleVerdict {
    pub forward: CtoVerdict,
    pub backward: CtoVerdict,
    pub feasible: bool,
    pub total_qmi: f64,
}

pub fn compute_reset_cycle_verdict(
    rho_reset: &DensityMatrix,
    rho_computed: &DensityMatrix,
    ctx: &ThermoContext,
    qmi_per_step: f64,
) -> Result<CycleVerdict> {
    let forward = cto_feasible_general(rho_reset, rho_computed, ctx, qmi_per_step)?;
    let backward = cto_feasible_general(rho_computed, rho_reset, ctx, qmi_per_step)?;
    Ok(CycleVerdict { feasible: forward.feasible && backward.feasible, total_qmi: 2.0 * qmi_per_step, forward, backward })
}
