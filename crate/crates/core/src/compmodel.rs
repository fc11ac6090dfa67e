//! Computational state spaces as partitions of a proto-computational basis,
//! block-diagonal operating contexts and the entropy split.

use crate::error::{contract, shape, Result};
use crate::linalg::{hs_norm, CMatrix};
use crate::state::{spectrum_entropy, von_neumann_entropy, DensityMatrix};

/// Cross-block coherence tolerance relative to `max(1, ‖ρ‖)`.
pub const BLOCK_TOL: f64 = 1e-10;

/// Blocks with probability at or below this cannot be restricted to.
pub const MIN_BLOCK_PROBABILITY: f64 = 1e-12;

/// Disjoint index blocks `B_c` of a `d`-dimensional basis. Indices not in any
/// block form the catch-all block `B_⊥`, which is the last outcome when
/// nonempty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisPartition {
    dim: usize,
    blocks: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl BasisPartition {
    pub fn new(dim: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![usize::MAX; dim];
        for (c, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(contract(format!("block {c} is empty")));
            }
            for &i in block {
                if i >= dim {
                    return Err(contract(format!("index {i} in block {c} exceeds dimension {dim}")));
                }
                if owner[i] != usize::MAX {
                    return Err(contract(format!("index {i} appears in blocks {} and {c}", owner[i])));
                }
                owner[i] = c;
            }
        }
        let explicit = blocks.len();
        let mut blocks = blocks;
        let rest: Vec<usize> = (0..dim).filter(|&i| owner[i] == usize::MAX).collect();
        if !rest.is_empty() {
            for &i in &rest {
                owner[i] = explicit;
            }
            blocks.push(rest);
        }
        Ok(Self { dim, blocks, owner })
    }

    /// One block per basis state.
    pub fn singletons(dim: usize) -> Self {
        Self::new(dim, (0..dim).map(|i| vec![i]).collect()).expect("singletons are disjoint")
    }

    /// `n` consecutive blocks of `size` indices each.
    pub fn uniform(n: usize, size: usize) -> Self {
        Self::new(n * size, (0..n).map(|c| (c * size..(c + 1) * size).collect()).collect())
            .expect("consecutive ranges are disjoint")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of outcomes, counting `B_⊥` when it is nonempty.
    pub fn num_outcomes(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, c: usize) -> &[usize] {
        &self.blocks[c]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Outcome index owning basis state `i`.
    pub fn outcome_of(&self, i: usize) -> usize {
        self.owner[i]
    }
}

/// A density matrix that is block-diagonal with respect to a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumContext {
    state: DensityMatrix,
    partition: BasisPartition,
}

impl QuantumContext {
    pub fn new(state: DensityMatrix, partition: BasisPartition) -> Result<Self> {
        if !validate_block_diagonal(&state, &partition)? {
            return Err(contract("state has coherences between distinct blocks"));
        }
        Ok(Self { state, partition })
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn partition(&self) -> &BasisPartition {
        &self.partition
    }
}

fn check_dims(rho: &DensityMatrix, p: &BasisPartition) -> Result<()> {
    if rho.dim() != p.dim() {
        return Err(shape(format!("state dimension {} differs from partition dimension {}", rho.dim(), p.dim())));
    }
    Ok(())
}

pub fn validate_block_diagonal(rho: &DensityMatrix, p: &BasisPartition) -> Result<bool> {
    check_dims(rho, p)?;
    let m = rho.matrix();
    let tol = BLOCK_TOL * hs_norm(m).max(1.0);
    let d = p.dim();
    for j in 0..d {
        for i in 0..d {
            if p.outcome_of(i) != p.outcome_of(j) && m[(i, j)].norm() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Zeroes every cross-block entry.
pub fn pinch(rho: &DensityMatrix, p: &BasisPartition) -> Result<DensityMatrix> {
    check_dims(rho, p)?;
    let m = rho.matrix();
    let pinched = CMatrix::from_fn(p.dim(), p.dim(), |i, j| {
        if p.outcome_of(i) == p.outcome_of(j) {
            m[(i, j)]
        } else {
            Default::default()
        }
    });
    DensityMatrix::new(pinched)
}

/// Block masses `P(c) = Σ_{i∈B_c} ρ_ii`.
pub fn computational_distribution(ctx: &QuantumContext) -> Vec<f64> {
    block_masses(ctx.state.matrix(), &ctx.partition)
}

pub(crate) fn block_masses(m: &CMatrix, p: &BasisPartition) -> Vec<f64> {
    p.blocks().iter().map(|b| b.iter().map(|&i| m[(i, i)].re).sum::<f64>().max(0.0)).collect()
}

/// Total, computational and non-computational entropy in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyDecomposition {
    pub total: f64,
    pub computational: f64,
    pub non_computational: f64,
}

pub fn entropy_decompose(ctx: &QuantumContext) -> Result<EntropyDecomposition> {
    let probs = computational_distribution(ctx);
    let total = von_neumann_entropy(&ctx.state);
    let computational = spectrum_entropy(&probs);
    let mut non_computational = 0.0;
    for (c, &pc) in probs.iter().enumerate() {
        if pc > MIN_BLOCK_PROBABILITY {
            non_computational += pc * von_neumann_entropy(restrict_context(ctx, c)?.state());
        }
    }
    Ok(EntropyDecomposition { total, computational, non_computational })
}

fn check_block_index(p: &BasisPartition, c: usize) -> Result<()> {
    if c >= p.num_outcomes() {
        return Err(shape(format!("block index {c} out of range ({} outcomes)", p.num_outcomes())));
    }
    Ok(())
}

/// Unnormalized restriction `Π_c ρ Π_c`.
pub(crate) fn restrict_unnormalized(m: &CMatrix, p: &BasisPartition, c: usize) -> CMatrix {
    CMatrix::from_fn(p.dim(), p.dim(), |i, j| {
        if p.outcome_of(i) == c && p.outcome_of(j) == c {
            m[(i, j)]
        } else {
            Default::default()
        }
    })
}

/// Zeroes all rows and columns outside `B_c` and renormalizes.
pub fn restrict_context(ctx: &QuantumContext, c: usize) -> Result<QuantumContext> {
    check_block_index(&ctx.partition, c)?;
    let pc = computational_distribution(ctx)[c];
    if pc <= MIN_BLOCK_PROBABILITY {
        return Err(contract(format!("block {c} has probability {pc:.3e}")));
    }
    let restricted = restrict_unnormalized(ctx.state.matrix(), &ctx.partition, c).unscale(pc);
    Ok(QuantumContext { state: DensityMatrix::new(restricted)?, partition: ctx.partition.clone() })
}
