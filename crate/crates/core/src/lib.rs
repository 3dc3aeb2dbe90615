//! Open-quantum-system dynamics by density-matrix purification.
//!
//! A mixed state of a `d`-level system is embedded as a pure state on a
//! `d x d` system-bath space. Exact Lindblad dynamics are propagated, each
//! propagated state is purified, and a single system-bath unitary
//! `U(t) = exp(i H)` is fitted per time point so that `U(t)` carries the
//! initial purification onto the purification at `t`. The fitted unitaries
//! can then be replayed with finite-shot tomography.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bfgs;
pub mod error;
pub mod experiment;
pub mod lindblad;
pub mod linalg;
pub mod models;
pub mod purification;
pub mod random;
pub mod report;
pub mod shots;
pub mod state;
pub mod unitary;

pub use error::{Error, Result};
