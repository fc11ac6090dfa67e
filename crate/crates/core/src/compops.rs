//! Classical computational operations, reversibility and entropy ejection.

use crate::compmodel::{block_masses, restrict_context, BasisPartition, QuantumContext, MIN_BLOCK_PROBABILITY};
use crate::error::{contract, shape, Result};
use crate::linalg::{is_unitary, CMatrix};
use crate::state::{evolve_unitary, spectrum_entropy, validate_distribution};

/// Probabilities above this count as support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Row-sum tolerance for operation rows.
pub const ROW_TOL: f64 = 1e-12;

/// Default total-variation tolerance for [`implements`].
pub const DEFAULT_IMPLEMENTS_TOL: f64 = 1e-9;

/// A (possibly partial) stochastic map between finite state sets.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticOp {
    n_out: usize,
    rows: Vec<Option<Vec<f64>>>,
}

impl StochasticOp {
    /// `rows[i]` is the final-state distribution for initial state `i`, or
    /// `None` outside the domain.
    pub fn new(n_out: usize, rows: Vec<Option<Vec<f64>>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if let Some(row) = row {
                if row.len() != n_out {
                    return Err(shape(format!("row {i} has {} entries, expected {n_out}", row.len())));
                }
                if row.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(contract(format!("row {i} has a negative or non-finite entry")));
                }
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > ROW_TOL {
                    return Err(contract(format!("row {i} sums to {total}")));
                }
            }
        }
        Ok(Self { n_out, rows })
    }

    /// Deterministic map `i ↦ map[i]`, undefined where `map[i]` is `None`.
    pub fn deterministic(n_out: usize, map: &[Option<usize>]) -> Result<Self> {
        let rows = map
            .iter()
            .map(|target| {
                target
                    .map(|j| {
                        if j >= n_out {
                            return Err(shape(format!("target {j} exceeds {n_out} final states")));
                        }
                        let mut row = vec![0.0; n_out];
                        row[j] = 1.0;
                        Ok(row)
                    })
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_out, rows)
    }

    /// Total deterministic map on `n` states.
    pub fn from_map(map: &[usize]) -> Result<Self> {
        let n = map.len();
        Self::deterministic(n, &map.iter().map(|&j| Some(j)).collect::<Vec<_>>())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_map(&(0..n).collect::<Vec<_>>()).expect("identity is valid")
    }

    /// Every state goes to state 0.
    pub fn erase(n: usize) -> Self {
        Self::from_map(&vec![0; n]).expect("erasure is valid")
    }

    pub fn n_in(&self) -> usize {
        self.rows.len()
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn row(&self, i: usize) -> Option<&[f64]> {
        self.rows.get(i).and_then(|r| r.as_deref())
    }

    pub fn domain(&self) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| self.rows[i].is_some()).collect()
    }

    /// `O₂ ∘ O₁`: apply `self` first, then `next`.
    pub fn then(&self, next: &StochasticOp) -> Result<StochasticOp> {
        if next.n_in() != self.n_out {
            return Err(shape("composed operations have mismatched state counts"));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let row = row.as_ref()?;
                let mut out = vec![0.0; next.n_out];
                for (k, &p) in row.iter().enumerate() {
                    if p > 0.0 {
                        let r = next.row(k)?;
                        for (o, q) in out.iter_mut().zip(r) {
                            *o += p * q;
                        }
                    }
                }
                Some(out)
            })
            .collect();
        StochasticOp::new(next.n_out, rows)
    }

    fn resolve_subset(&self, over: Option<&[usize]>) -> Result<Vec<usize>> {
        match over {
            None => Ok(self.domain()),
            Some(a) => {
                if let Some(i) = a.iter().find(|&&i| self.row(i).is_none()) {
                    return Err(contract(format!("state {i} is outside the operation's domain")));
                }
                Ok(a.to_vec())
            }
        }
    }
}

/// An operation paired with an input distribution supported on its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextualizedComputation {
    op: StochasticOp,
    input: Vec<f64>,
}

impl ContextualizedComputation {
    pub fn new(op: StochasticOp, input: Vec<f64>) -> Result<Self> {
        if input.len() != op.n_in() {
            return Err(shape(format!("input has {} entries, operation has {} initial states", input.len(), op.n_in())));
        }
        validate_distribution(&input, 1e-9)?;
        if let Some(i) = support(&input).into_iter().find(|&i| op.row(i).is_none()) {
            return Err(contract(format!("input state {i} has probability but is outside the domain")));
        }
        Ok(Self { op, input })
    }

    pub fn op(&self) -> &StochasticOp {
        &self.op
    }

    pub fn input(&self) -> &[f64] {
        &self.input
    }

    /// Pushforward `P_out(j) = Σ_i P(i) O(i, j)`.
    pub fn output(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.op.n_out];
        for (i, &p) in self.input.iter().enumerate() {
            if let Some(row) = self.op.row(i) {
                for (o, q) in out.iter_mut().zip(row) {
                    *o += p * q;
                }
            }
        }
        out
    }
}

fn support(p: &[f64]) -> Vec<usize> {
    (0..p.len()).filter(|&i| p[i] > SUPPORT_THRESHOLD).collect()
}

pub fn is_deterministic(op: &StochasticOp, over: Option<&[usize]>) -> Result<bool> {
    let subset = op.resolve_subset(over)?;
    Ok(subset.iter().all(|&i| {
        let row = op.row(i).expect("subset lies in the domain");
        row.iter().cloned().fold(0.0, f64::max) >= 1.0 - ROW_TOL
    }))
}

/// No final state is reachable from two distinct initial states in the subset.
pub fn is_reversible(op: &StochasticOp, over: Option<&[usize]>) -> Result<bool> {
    let subset = op.resolve_subset(over)?;
    let mut source = vec![None; op.n_out];
    for &i in &subset {
        for (j, &p) in op.row(i).expect("subset lies in the domain").iter().enumerate() {
            if p > SUPPORT_THRESHOLD {
                match source[j] {
                    Some(k) if k != i => return Ok(false),
                    _ => source[j] = Some(i),
                }
            }
        }
    }
    Ok(true)
}

fn require_deterministic(op: &StochasticOp) -> Result<()> {
    if is_deterministic(op, None)? {
        Ok(())
    } else {
        Err(contract("entropy-ejection predicates are defined for deterministic operations only"))
    }
}

/// Whether some input distribution forces the non-computational entropy up.
/// For deterministic operations this is the existence of a merge.
pub fn is_entropy_ejecting(op: &StochasticOp) -> Result<bool> {
    require_deterministic(op)?;
    Ok(!is_reversible(op, None)?)
}

/// Change in computational entropy and the implied minimum increase of
/// non-computational entropy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyDelta {
    pub delta_h: f64,
    pub min_delta_s_nc: f64,
}

pub fn computational_entropy_delta(c: &ContextualizedComputation) -> EntropyDelta {
    let delta_h = spectrum_entropy(&c.output()) - spectrum_entropy(&c.input);
    EntropyDelta { delta_h, min_delta_s_nc: (-delta_h).max(0.0) }
}

/// Non-ejecting iff unconditionally reversible; expected always true.
pub fn check_traditional_theorem(op: &StochasticOp) -> Result<bool> {
    Ok(!is_entropy_ejecting(op)? == is_reversible(op, None)?)
}

/// Non-ejecting in context iff reversible on the input support; expected
/// always true.
pub fn check_generalized_theorem(c: &ContextualizedComputation) -> Result<bool> {
    require_deterministic(&c.op)?;
    let non_ejecting = computational_entropy_delta(c).delta_h >= -SUPPORT_THRESHOLD;
    Ok(non_ejecting == is_reversible(&c.op, Some(&support(&c.input)))?)
}

/// Mutual information `I(X;Y)` of a joint distribution given as rows over X.
/// This is the entropy generated when Y is erased without reference to X.
pub fn landauer_cost_oblivious_erasure(joint: &[Vec<f64>]) -> Result<f64> {
    let cols = joint.first().map(Vec::len).ok_or_else(|| contract("joint distribution is empty"))?;
    if joint.iter().any(|r| r.len() != cols) {
        return Err(shape("joint distribution rows have different lengths"));
    }
    let flat: Vec<f64> = joint.iter().flatten().copied().collect();
    validate_distribution(&flat, 1e-9)?;
    let px: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let py: Vec<f64> = (0..cols).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    Ok((spectrum_entropy(&px) + spectrum_entropy(&py) - spectrum_entropy(&flat)).max(0.0))
}

/// Per-block outcome of [`implements_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck {
    pub block: usize,
    pub probability: f64,
    pub output: Vec<f64>,
    pub tv_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImplementsReport {
    pub blocks: Vec<BlockCheck>,
    pub max_tv_distance: f64,
    pub passed: bool,
}

/// Whether `u` realizes `op` on the given context, block by block.
pub fn implements(
    u: &CMatrix,
    p_in: &BasisPartition,
    p_out: &BasisPartition,
    op: &StochasticOp,
    ctx: &QuantumContext,
    tol: f64,
) -> Result<bool> {
    Ok(implements_report(u, p_in, p_out, op, ctx, tol)?.passed)
}

pub fn implements_report(
    u: &CMatrix,
    p_in: &BasisPartition,
    p_out: &BasisPartition,
    op: &StochasticOp,
    ctx: &QuantumContext,
    tol: f64,
) -> Result<ImplementsReport> {
    let d = p_in.dim();
    if p_out.dim() != d || u.nrows() != d || u.ncols() != d {
        return Err(shape(format!(
            "unitary is {}x{} but partitions have dimensions {} and {}",
            u.nrows(),
            u.ncols(),
            d,
            p_out.dim()
        )));
    }
    if op.n_in() != p_in.num_outcomes() || op.n_out() != p_out.num_outcomes() {
        return Err(shape(format!(
            "operation maps {} to {} states but partitions have {} and {} outcomes",
            op.n_in(),
            op.n_out(),
            p_in.num_outcomes(),
            p_out.num_outcomes()
        )));
    }
    if ctx.partition() != p_in {
        return Err(contract("context partition differs from the input partition"));
    }
    if !is_unitary(u, 1e-10) {
        return Err(contract("implementing operator is not unitary"));
    }
    let dist = crate::compmodel::computational_distribution(ctx);
    let mut blocks = Vec::new();
    for (c, &pc) in dist.iter().enumerate() {
        if pc <= MIN_BLOCK_PROBABILITY {
            continue;
        }
        let expected = op
            .row(c)
            .ok_or_else(|| contract(format!("block {c} has probability but is outside the operation's domain")))?;
        let restricted = restrict_context(ctx, c)?;
        let evolved = evolve_unitary(restricted.state(), u)?;
        let output = block_masses(evolved.matrix(), p_out);
        let tv = 0.5 * output.iter().zip(expected).map(|(a, b)| (a - b).abs()).sum::<f64>();
        blocks.push(BlockCheck { block: c, probability: pc, output, tv_distance: tv });
    }
    let max_tv = blocks.iter().map(|b| b.tv_distance).fold(0.0, f64::max);
    Ok(ImplementsReport { passed: max_tv <= tol, max_tv_distance: max_tv, blocks })
}
