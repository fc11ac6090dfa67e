//! One handler per task: validate the payload, run the library, fill a report.

use revtherm_core::adiabatic::{self, AdiabaticParams};
use revtherm_core::channels::{simulate_reset, ResetMode, ResetScenario};
use revtherm_core::compmodel::{entropy_decompose, BasisPartition, QuantumContext};
use revtherm_core::compops::{
    check_generalized_theorem, check_traditional_theorem, computational_entropy_delta, implements_report,
    is_deterministic, is_entropy_ejecting, is_reversible, ContextualizedComputation, StochasticOp,
    DEFAULT_IMPLEMENTS_TOL,
};
use revtherm_core::gksl::{
    self, corner_superprojectors, decompose, dephasing_check, dfs_commutes, uniform_times, Lindbladian, Propagator,
};
use revtherm_core::linalg::{self, hs_norm, identity, CMatrix};
use revtherm_core::resource::{
    commuting_populations, compute_reset_cycle_verdict, cto_feasible_general, second_laws_check, thermomaj_curve,
    thermomaj_feasible, OrderingConvention, CURVE_TOL, DEFAULT_ALPHAS, FREE_ENERGY_TOL,
};
use revtherm_core::state::{DensityMatrix, Hamiltonian, ThermoContext};
use serde_json::{json, Value};

use crate::report::{num, nums, ReportBuilder, Run, Table, Units};
use crate::scenario::*;

/// Caller options shared by every task.
#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub units: Units,
    /// Replaces the task's primary check tolerance.
    pub tol: Option<f64>,
}

impl Options {
    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

pub fn run(scenario: &Scenario, opts: Options, stem: &str) -> Outcome<Run> {
    let mut b = ReportBuilder::new(opts.units);
    match &scenario.payload {
        Payload::Classify(p) => classify(p, &mut b)?,
        Payload::EntropyDecompose(p) => entropy(p, opts, &mut b)?,
        Payload::ImplementsCheck(p) => implements_check(p, opts, &mut b)?,
        Payload::Landauer(p) => landauer(p, opts, &mut b)?,
        Payload::ThermoCheck(p) => thermo(p, opts, &mut b)?,
        Payload::CtoCheck(p) => cto(p, opts, &mut b)?,
        Payload::GkslEvolve(p) => evolve(p, opts, &mut b)?,
        Payload::GkslAsymptotic(p) => asymptotic(p, opts, &mut b)?,
        Payload::AdiabaticSweep(p) => sweep(p, opts, &mut b)?,
    }
    Ok(b.finish(scenario, stem))
}

fn density(m: &MatrixJson, path: &str) -> Outcome<DensityMatrix> {
    DensityMatrix::new(m.decode(path)?).at(path)
}

fn hamiltonian(m: &MatrixJson, path: &str) -> Outcome<Hamiltonian> {
    Hamiltonian::new(m.decode(path)?).at(path)
}

fn thermo_context(h: &MatrixJson, temperature: f64, path: &str) -> Outcome<ThermoContext> {
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(Failure::schema(&format!("{path}.temperature"), format!("must be finite and > 0, got {temperature}")));
    }
    ThermoContext::new(hamiltonian(h, &format!("{path}.hamiltonian"))?, 1.0 / temperature).at(path)
}

fn partition(dim: usize, blocks: &[Vec<usize>], path: &str) -> Outcome<BasisPartition> {
    BasisPartition::new(dim, blocks.to_vec()).at(path)
}

fn operation(op: &OpJson, path: &str) -> Outcome<StochasticOp> {
    match (&op.map, &op.rows) {
        (Some(map), None) => StochasticOp::deterministic(op.n_out, map).at(&format!("{path}.map")),
        (None, Some(rows)) => StochasticOp::new(op.n_out, rows.clone()).at(&format!("{path}.rows")),
        _ => Err(Failure::schema(path, "exactly one of `map` and `rows` is required")),
    }
}

fn matrix_value(m: &CMatrix) -> Value {
    serde_json::to_value(MatrixJson::encode(m)).expect("matrix serializes")
}

fn positive(x: f64, path: &str) -> Outcome<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Failure::schema(path, format!("must be finite and > 0, got {x}")))
    }
}

fn classify(p: &ClassifyPayload, b: &mut ReportBuilder) -> Outcome<()> {
    let op = operation(&p.op, "payload.op")?;
    let over = p.support.as_deref();
    b.value("n_in", json!(op.n_in()));
    b.value("n_out", json!(op.n_out()));
    b.value("domain", json!(op.domain()));
    b.value("deterministic", json!(is_deterministic(&op, over).at("payload.support")?));
    b.value("reversible", json!(is_reversible(&op, over).at("payload.support")?));
    let deterministic = is_deterministic(&op, None).at("payload.op")?;
    if deterministic {
        b.value("entropy_ejecting", json!(is_entropy_ejecting(&op).at("payload.op")?));
        b.check("traditional_theorem", check_traditional_theorem(&op).at("payload.op")?);
    } else {
        b.value("entropy_ejecting", Value::Null);
    }
    if let Some(input) = &p.input {
        let c = ContextualizedComputation::new(op.clone(), input.clone()).at("payload.input")?;
        let delta = computational_entropy_delta(&c);
        b.value("output", nums(&c.output()));
        b.entropic("delta_h", delta.delta_h);
        b.entropic("min_delta_s_nc", delta.min_delta_s_nc);
        if deterministic {
            b.check("generalized_theorem", check_generalized_theorem(&c).at("payload.input")?);
        }
    }
    Ok(())
}

fn entropy(p: &EntropyDecomposePayload, opts: Options, b: &mut ReportBuilder) -> Outcome<()> {
    let rho = density(&p.state, "payload.state")?;
    let part = partition(rho.dim(), &p.blocks, "payload.blocks")?;
    let ctx = QuantumContext::new(rho, part).at("payload.state")?;
    let dec = entropy_decompose(&ctx).at("payload.state")?;
    let tol = opts.tol_or(1e-9);
    let residual = (dec.total - dec.computational - dec.non_computational).abs();
    b.value("distribution", nums(&revtherm_core::compmodel::computational_distribution(&ctx)));
    b.entropic("total", dec.total);
    b.entropic("computational", dec.computational);
    b.entropic("non_computational", dec.non_computational);
    b.entropic("residual", residual);
    b.tolerance("decomposition", tol);
    b.check("decomposition", residual <= tol);
    Ok(())
}

fn implements_check(p: &ImplementsPayload, opts: Options, b: &mut ReportBuilder) -> Outcome<()> {
    let u = p.unitary.decode("payload.unitary")?;
    let rho = density(&p.state, "payload.state")?;
    let p_in = partition(rho.dim(), &p.blocks_in, "payload.blocks_in")?;
    let p_out = partition(rho.dim(), &p.blocks_out, "payload.blocks_out")?;
    let op = operation(&p.op, "payload.op")?;
    let ctx = QuantumContext::new(rho, p_in.clone()).at("payload.state")?;
    let tol = opts.tol_or(DEFAULT_IMPLEMENTS_TOL);
    let r = implements_report(&u, &p_in, &p_out, &op, &ctx, tol).at("payload")?;
    let blocks: Vec<Value> = r
        .blocks
        .iter()
        .map(|c| {
            json!({
                "block": c.block,
                "probability": num(c.probability),
                "output": nums(&c.output),
                "tv_distance": num(c.tv_distance),
            })
        })
        .collect();
    b.value("blocks", Value::Array(blocks));
    b.number("max_tv_distance", r.max_tv_distance);
    b.tolerance("tv_distance", tol);
    b.check("implements", r.passed);
    Ok(())
}

fn landauer(p: &LandauerPayload, opts: Options, b: &mut ReportBuilder) -> Outcome<()> {
    let env = thermo_context(&p.environment.hamiltonian, p.environment.temperature, "payload.environment")?;
    let states = p
        .states
        .iter()
        .enumerate()
        .map(|(k, s)| Ok((s.probability, density(&s.state, &format!("payload.states[{k}].state"))?)))
        .collect::<Outcome<Vec<_>>>()?;
    let target = density(&p.target, "payload.target")?;
    let mode = match (&p.unitary, &p.conditional_unitaries) {
        (Some(u), None) => ResetMode::Unconditional(u.decode("payload.unitary")?),
        (None, Some(us)) => ResetMode::Conditional(
            us.iter()
                .enumerate()
                .map(|(k, u)| u.decode(&format!("payload.conditional_unitaries[{k}]")))
                .collect::<Outcome<_>>()?,
        ),
        _ => return Err(Failure::schema("payload", "exactly one of `unitary` and `conditional_unitaries` is required")),
    };
    let conditional = matches!(mode, ResetMode::Conditional(_));
    let scenario = ResetScenario::new(states, target, env, mode).at("payload")?;
    let r = simulate_reset(&scenario).at("payload")?;
    let tol = opts.tol_or(revtherm_core::channels::BOUND_TOL);
    b.value("mode", json!(if conditional { "conditional" } else { "unconditional" }));
    b.number("temperature", p.environment.temperature);
    b.entropic("erased_information", scenario.erased_information());
    b.number("bound", r.bound);
    b.number("average_delta_e", r.average);
    b.value("per_state_delta_e", nums(&r.per_state));
    b.number("target_error", r.target_error);
    b.tolerance("bound", tol);
    b.check("bound_satisfied", r.average >= r.bound - tol);
    Ok(())
}

fn convention(o: OrderingJson) -> OrderingConvention {
    match o {
        OrderingJson::Slope => OrderingConvention::Slope,
        OrderingJson::BoltzmannWeighted => OrderingConvention::BoltzmannWeighted,
    }
}

fn thermo(p: &ThermoPayload, opts: Options, b: &mut ReportBuilder) -> Outcome<()> {
    let ctx = thermo_context(&p.hamiltonian, p.temperature, "payload")?;
    let rho_in = density(&p.rho_in, "payload.rho_in")?;
    let rho_out = density(&p.rho_out, "payload.rho_out")?;
    let (pop_in, energies) = commuting_populations(&rho_in, &ctx).at("payload.rho_in")?;
    let (pop_out, energies_out) = commuting_populations(&rho_out, &ctx).at("payload.rho_out")?;
    if energies.iter().zip(&energies_out).any(|(a, c)| (a - c).abs() > 1e-9) {
        return Err(Failure::schema("payload.rho_out", "states do not share an energy eigenbasis ordering"));
    }
    let conv = convention(p.ordering);
    let feasible = thermomaj_feasible(&pop_in, &pop_out, &energies, ctx.beta, conv).at("payload")?;
    let mut curves = Table::new("curves", vec!["curve".into(), "x".into(), "y".into()]);
    for (label, pop) in [("in", &pop_in), ("out", &pop_out)] {
        for (x, y) in thermomaj_curve(pop, &energies, ctx.beta, conv).at("payload")?.points {
            curves.push_labeled(label, &[x, y]);
        }
    }
    let alphas = p.alphas.clone().unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
    let laws = second_laws_check(&rho_in, &rho_out, &ctx, &alphas).at("payload.alphas")?;
    b.value("energies", nums(&energies));
    b.value("populations_in", nums(&pop_in));
    b.value("populations_out", nums(&pop_out));
    b.value("ordering", json!(if conv == OrderingConvention::Slope { "slope" } else { "boltzmann-weighted" }));
    b.value("thermomajorizes", json!(feasible));
    b.value(
        "free_energy_margins",
        Value::Array(laws.margins.iter().map(|(a, m)| json!({"alpha": num(*a), "margin": num(*m)})).collect()),
    );
    b.value("first_violation", laws.first_violation().map_or(Value::Null, num));
    b.tolerance("curve", opts.tol_or(CURVE_TOL));
    b.tolerance("free_energy", FREE_ENERGY_TOL);
    b.check("thermomajorization", feasible);
    b.check("second_laws", laws.passed);
    b.table(curves);
    Ok(())
}

fn cto(p: &CtoPayload, opts: Options, b: &mut ReportBuilder) -> Outcome<()> {
    let ctx = thermo_context(&p.hamiltonian, p.temperature, "payload")?;
    let rho_in = density(&p.rho_in, "payload.rho_in")?;
    let rho_out = density(&p.rho_out, "payload.rho_out")?;
    let tol = opts.tol_or(FREE_ENERGY_TOL);
    let verdict_value = |v: &revtherm_core::resource::CtoVerdict, units: Units| {
        json!({
            "free_energy_in": num(v.free_energy_in),
            "free_energy_out": num(v.free_energy_out),
            "margin": num(v.margin),
            "qmi": num(units.entropy(v.qmi)),
        })
    };
    b.tolerance("free_energy", tol);
    if p.cycle {
        let v = compute_reset_cycle_verdict(&rho_in, &rho_out, &ctx, p.qmi_budget).at("payload")?;
        b.value("forward", verdict_value(&v.forward, b.units()));
        b.value("backward", verdict_value(&v.backward, b.units()));
        b.entropic("total_qmi", v.total_qmi);
        b.check("forward", v.forward.margin >= -tol);
        b.check("backward", v.backward.margin >= -tol);
    } else {
        let v = cto_feasible_general(&rho_in, &rho_out, &ctx, p.qmi_budget).at("payload")?;
        b.value("forward", verdict_value(&v, b.units()));
        b.check("forward", v.margin >= -tol);
    }
    Ok(())
}

fn lindbladian(g: &GeneratorJson, path: &str) -> Outcome<Lindbladian> {
    let h = hamiltonian(&g.hamiltonian, &format!("{path}.hamiltonian"))?;
    let jumps = g
        .jumps
        .iter()
        .enumerate()
        .map(|(k, j)| Ok((j.operator.decode(&format!("{path}.jumps[{k}].operator"))?, j.rate)))
        .collect::<Outcome<Vec<_>>>()?;
    Lindbladian::new(h, jumps).at(&format!("{path}.jumps"))
}

fn numeric(err: revtherm_core::Error) -> Failure {
    Failure::from_core("evaluation", err)
}

fn evolve(p: &EvolvePayload, opts: Options, b: &mut ReportBuilder) -> Outcome<()> {
    let l = lindbladian(&p.generator, "payload.generator")?;
    let rho0 = density(&p.rho0, "payload.rho0")?;
    if rho0.dim() != l.dim() {
        return Err(Failure::schema("payload.rho0", format!("dimension {} does not match the generator", rho0.dim())));
    }
    if !p.t_max.is_finite() || p.t_max < 0.0 {
        return Err(Failure::schema("payload.t_max", "must be finite and >= 0"));
    }
    if p.n_points == 0 {
        return Err(Failure::schema("payload.n_points", "must be at least 1"));
    }
    let d = l.dim();
    let mut header = vec!["t".to_string()];
    for i in 0..d {
        for j in 0..d {
            header.push(format!("re_{i}_{j}"));
            header.push(format!("im_{i}_{j}"));
        }
    }
    let mut table = Table::new("trajectory", header);
    let propagator = Propagator::new(&l);
    let tol = opts.tol_or(gksl::TRACE_TOL);
    let mut max_trace_dev: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut last = rho0.clone();
    for t in uniform_times(p.t_max, p.n_points) {
        let rho = propagator.propagate(&rho0, t).map_err(numeric)?;
        let m = rho.matrix();
        max_trace_dev = max_trace_dev.max((linalg::trace(m) - linalg::c64(1.0, 0.0)).norm());
        min_eig = min_eig.min(rho.eigenvalues().first().copied().unwrap_or(0.0));
        let mut row = vec![t];
        for i in 0..d {
            for j in 0..d {
                row.push(m[(i, j)].re);
                row.push(m[(i, j)].im);
            }
        }
        table.push(&row);
        last = rho;
    }
    b.number("trace_functional_residual", propagator.generator().trace_functional_residual());
    b.number("max_trace_deviation", max_trace_dev);
    b.number("min_eigenvalue", min_eig);
    b.value("final_state", matrix_value(last.matrix()));
    b.tolerance("trace", tol);
    b.check("trace_preserved", max_trace_dev <= tol);
    b.table(table);
    Ok(())
}

fn asymptotic(p: &AsymptoticPayload, opts: Options, b: &mut ReportBuilder) -> Outcome<()> {
    let l = lindbladian(&p.generator, "payload.generator")?;
    let tol = opts.tol_or(gksl::ASYMPTOTIC_TOL);
    let dec = decompose(&l, tol).map_err(numeric)?;
    let d = l.dim();
    let mut eigenvalues = dec.eigenvalues.clone();
    eigenvalues.sort_by(|a, c| c.re.total_cmp(&a.re).then(a.im.total_cmp(&c.im)));
    let rounded = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    b.value("eigenvalues", Value::Array(eigenvalues.iter().map(|z| json!([num(rounded(z.re)), num(rounded(z.im))])).collect()));
    b.value("asymptotic_count", json!(dec.asymptotic.len()));
    b.value("frequencies", nums(&dec.frequencies()));
    b.value(
        "method",
        json!(match dec.method {
            gksl::ProjectionMethod::Spectral => "spectral",
            gksl::ProjectionMethod::Cesaro { .. } => "cesaro",
        }),
    );
    let steady = dec.p_inf.apply(&identity(d).unscale(d as f64)).map_err(numeric)?;
    let clean = |m: &CMatrix| m.map(|z| linalg::c64(rounded(z.re), rounded(z.im)));
    b.value("steady_state_of_mixed", matrix_value(&clean(&steady)));
    b.value("asymptotic_projector", matrix_value(&clean(&dec.p_a)));
    b.value("asymptotic_rank", json!(linalg::numerical_rank(&dec.p_a, 1e-9)));
    let pm = dec.p_inf.matrix();
    let idempotence = hs_norm(&(pm * pm - pm));
    let corners = corner_superprojectors(&dec);
    let n = d * d;
    let completeness = hs_norm(&(corners.iter().fold(CMatrix::zeros(n, n), |acc, s| acc + s.matrix()) - identity(n)));
    b.number("projection_idempotence", idempotence);
    b.number("four_corners_completeness", completeness);
    b.tolerance("asymptotic", tol);
    b.tolerance("idempotence", 1e-8);
    b.tolerance("completeness", 1e-12);
    b.check("projection_idempotent", idempotence <= 1e-8);
    b.check("four_corners_complete", completeness <= 1e-12);
    if let Some(blocks) = &p.blocks {
        let part = partition(d, blocks, "payload.blocks")?;
        b.value("asymptotic_projector_respects_blocks", json!(dfs_commutes(&dec.p_a, &part).at("payload.blocks")?));
        if let Some(probe) = &p.probe {
            let rho = density(&probe.state, "payload.probe.state")?;
            let t = positive(probe.t_resolve, "payload.probe.t_resolve")?;
            let r = dephasing_check(&l, &part, &rho, t).map_err(numeric)?;
            b.number("initial_coherence", r.initial_coherence);
            b.number("residual_coherence", r.residual_coherence);
            b.tolerance("classical_fraction", gksl::CLASSICAL_FRACTION);
            b.check("dephased", r.classical);
        }
    } else if p.probe.is_some() {
        return Err(Failure::schema("payload.probe", "a probe needs `blocks`"));
    }
    Ok(())
}

fn sweep(p: &AdiabaticPayload, opts: Options, b: &mut ReportBuilder) -> Outcome<()> {
    let params = AdiabaticParams::new(p.e_sig, p.tau_r, p.tau_e, p.c_sw, p.c_lk).at("payload")?;
    let rows = adiabatic::sweep(&params, p.t_min, p.t_max, p.n_points).at("payload")?;
    let mut table = Table::new("sweep", ["t_tr", "e_sw", "e_lk", "e_diss"].map(String::from).to_vec());
    for r in &rows {
        table.push(&[r.t_tr, r.e_sw, r.e_lk, r.e_diss]);
    }
    let best = rows.iter().min_by(|a, c| a.e_diss.total_cmp(&c.e_diss)).expect("sweep is nonempty");
    let opt = adiabatic::optimal_ttr(&params);
    let min = adiabatic::min_e_diss(&params);
    let bound = adiabatic::efficiency_bound(&params, p.efficiency_constant);
    let tol = opts.tol_or(0.005);
    b.number("adjusted_tau_r", params.adjusted_tau_r());
    b.number("adjusted_tau_e", params.adjusted_tau_e());
    b.value("asymptotic_regime", json!(params.in_asymptotic_regime()));
    b.number("optimal_t_tr", opt);
    b.number("min_e_diss", min);
    b.value("optimal_outside_validity", json!(params.outside_validity(opt)));
    b.value("grid_minimum", json!({"t_tr": num(best.t_tr), "e_diss": num(best.e_diss)}));
    b.number("efficiency_bound", bound.value);
    b.value("efficiency_regime_flag", json!(bound.flagged));
    b.tolerance("optimum_relative", tol);
    b.check("grid_above_minimum", best.e_diss >= min * (1.0 - 1e-12));
    let inside = p.t_min <= opt && opt <= p.t_max;
    if inside {
        b.check("grid_brackets_optimum", (best.t_tr - opt).abs() <= tol * opt);
    }
    b.table(table);
    Ok(())
}
