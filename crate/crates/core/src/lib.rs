//! Adaptive random quantum eigensolver toolkit.
//!
//! Simulates a single-shot measurement-feedback protocol that adapts a
//! parametrized state ("quantum individual") toward eigenvectors of a given
//! operator, and optimizes the mutation distribution driving that adaptation.
//! The mutation distribution is a knot-parametrized symmetric CDF on [-1, 1],
//! sampled by inverse transform, whose scale is adjusted by a multiplicative
//! reward/punishment rule after every shot.
//!
//! Module map:
//! - [`linalg`]: dense complex linear algebra for dimensions 2..=16
//!   (Hermitian/unitary eigendecomposition, Born-rule sampling, fidelity).
//! - [`cdf`]: the knot-parametrized monotone CDF (Steffen-style piecewise
//!   cubic), its density, quantile function, and knot scaling.
//! - [`genotype`]: angle-vector genotypes and the codification gate built
//!   from two-level unitaries.
//! - [`engine`]: the protocol loop, reward/punishment state, seeded Monte
//!   Carlo ensembles.
//! - [`optimizer`]: derivative-free optimization of the knot set under
//!   learning-speed and learning-accuracy cost criteria.
//! - [`operators`]: builders for the stock single- and two-qubit operators.
//! - [`stats`]: histogram and Kolmogorov-Smirnov helpers.

pub mod cdf;
pub mod engine;
pub mod error;
pub mod genotype;
pub mod linalg;
pub mod operators;
pub mod optimizer;
pub mod seeds;
pub mod stats;

pub use cdf::{KnotSet, MonotoneCdf};
pub use engine::{MonteCarloSummary, RewardPunishment, RunConfig, RunTrace, ScalingMode};
pub use error::{Error, Result};
pub use genotype::Genotype;
pub use linalg::{EigenSystem, HermitianObservable, StateVector, UnitaryMatrix};
pub use optimizer::{CostCriterion, CostSpec, OptimizationResult};
