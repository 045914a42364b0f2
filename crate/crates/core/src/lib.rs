//! Random-walk corpus analysis toolkit.
//!
//! The crate samples window-based co-occurrence corpora from random walks on
//! weighted graphs, computes the exact finite-length expectation of the
//! relative co-occurrence frequencies and their long-walk limit, evaluates
//! spectral and concentration error bounds on the sampling error, and plans
//! the walk-count / walk-length split for a fixed step budget.
//!
//! Modules:
//! - [`graph`]: CSR graphs, edge-list parsing, transition model (stationary
//!   distribution, period, bipartiteness).
//! - [`walker`]: corpus sampling (number of walks N, length L, window T),
//!   visit frequencies, corpus serialization.
//! - [`limits`]: exact expected frequency matrix for finite L and the
//!   asymptotic matrix omega.
//! - [`spectral`]: normalized-Laplacian spectrum, mixing factors, spectral
//!   reconstruction of P^t, Doeblin constants.
//! - [`bounds`]: Hoeffding tail bounds in N, expectation-error bounds U in
//!   L, and the joint bound.
//! - [`planner`]: budget heuristic choosing N and L for a step budget K.
//! - [`embed`]: frequency-weighted embedding objective and a deterministic
//!   full-batch trainer.

pub mod bounds;
pub mod embed;
pub mod error;
pub mod graph;
pub mod limits;
pub mod planner;
pub mod spectral;
pub mod walker;

#[cfg(feature = "test-utils")]
pub mod testutil;

pub use error::{Error, Result};
