//! Quantum-thermodynamic foundations of classical reversible computing.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex kernel (tensor products, partial trace,
//!   eigendecompositions, matrix exponential, column-stacking vectorization).
//! - [`state`]: density matrices, Gibbs states and the entropy family.
//! - [`compmodel`]: basis partitions, block-diagonal operating contexts and the
//!   computational / non-computational entropy split.
//! - [`compops`]: classical operations, reversibility predicates and the
//!   theorem checks that tie them to entropy ejection.
//! - [`resource`]: thermomajorization and catalytic thermal operation feasibility.
//! - [`channels`]: Stinespring dilations, Kraus operators and Landauer bounds.
//! - [`gksl`]: Lindblad generators, asymptotic projections and DFS structure.
//! - [`adiabatic`]: the switching/leakage dissipation model.
//!
//! Entropies are in nats and `k_B = 1` throughout.

pub mod error;
pub mod linalg;
pub mod state;
pub mod compmodel;
pub mod compops;
pub mod resource;
pub mod channels;
pub mod gksl;
pub mod adiabatic;

pub use error::{Error, Result};

#[cfg(test)]
#[path = "../tests/common/mod.rs"]
pub(crate) mod testutil;
