//! Certification of invexity, strict invexity, KT-invexity and strict
//! KT-invexity for differentiable multiobjective programs.
//!
//! Every pairwise check is decided exactly by a small linear program: it
//! either produces a kernel `eta(x, xbar)` that satisfies the defining
//! inequalities, or a multiplier certificate exhibiting a vector critical
//! (or Kuhn-Tucker) point that fails to solve its own weighting problem.
//! Domain-level claims are bounded by the sampling resolution used.

pub mod alternative;
pub mod cli;
pub mod error;
pub mod expr;
pub mod invexity;
pub mod linalg;
pub mod lp;
pub mod problem;
pub mod report;
pub mod scalarization;
pub mod stationarity;
pub mod tol;

pub use error::{Error, Result};
pub use tol::ToleranceConfig;
