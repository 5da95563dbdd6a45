//! Ordinal-pattern kernels on weighted graphs.
//!
//! An *ordinal pattern* is a simple path whose successive edge weights
//! strictly decrease. This crate provides:
//!
//! - [`graph`]: the weighted-graph model, JSON/CSV I/O, a synthetic
//!   correlation-network generator and missing-edge perturbation.
//! - [`ordinal`]: exhaustive (depth-bounded) pattern enumeration and the
//!   exact pattern kernels. Exponential; meant for small graphs and as a
//!   reference for the DOP kernel.
//! - [`dop`]: greedy depth-first construction of the deepest ordinal
//!   pattern (DOP) per start node, and discriminative-prefix mining.
//! - [`kernels`]: the DOP kernel, attribute kernels, Gram matrices and PSD
//!   diagnostics.
//! - [`learn`]: an SMO solver for precomputed kernels, leave-one-out
//!   evaluation with grid search, and the missing-data robustness sweep.
//!
//! Data-parallel loops (per-graph profiles, Gram cells, LOOCV folds) run on
//! rayon when the `parallel` feature is enabled; see [`Exec`].

pub mod dop;
pub mod error;
pub mod exec;
pub mod graph;
pub mod kernels;
pub mod learn;
pub mod ordinal;

pub use error::{Error, Result};
pub use exec::Exec;
