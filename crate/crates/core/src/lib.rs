//! Tail bounds, counterexample classes and Monte Carlo experiments for the
//! supremum of normalized i.i.d. partial sums over L1-dense function classes.
//!
//! The crate is split into:
//!
//! * [`bounds`]: closed-form thresholds `u(σ)`, `ū(σ)`, `û(σ)` and the tail
//!   bounds they gate, with regime classification.
//! * [`classes`]: the grid indicator classes `F_σ` / `F̄_σ` and a greedy
//!   L1(ν) cover used to estimate density parameters.
//! * [`empirical`]: uniform samples, `F_n`, `G_n`, the class supremum and the
//!   modulus of continuity of `G_n`.
//! * [`poisson`]: Poisson processes, the Poisson lower-bound construction and
//!   the Poisson/empirical coupling.
//! * [`montecarlo`]: replicated tail estimation, Wilson intervals, exact
//!   enumeration for small instances and bound comparison.
//! * [`cli`]: the command implementations behind the `suptail` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod classes;
pub mod cli;
pub mod empirical;
mod error;
pub mod montecarlo;
pub mod poisson;
pub mod rng;
pub mod verify;

pub use bounds::{BoundParams, DenseClass, Regime};
pub use classes::{CellMeasure, CoverResult, GridClassSpec};
pub use empirical::SamplePath;
pub use error::{Error, Result};
pub use montecarlo::{ExperimentConfig, TailEstimate};
pub use poisson::{CoupledPair, PoissonPath};
pub use rng::StreamSeed;
