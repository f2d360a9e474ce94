//! Decision toolkit for cluster consensus of discrete-time linear multi-agent
//! systems `x(t+1) = P(t+1) x(t)`, where every `P(t)` is drawn from a finite
//! set of row-stochastic matrices and the agents are partitioned into
//! clusters.
//!
//! The crate answers one question exactly: does every infinite matrix
//! sequence drive every initial state to a limit that is constant on each
//! cluster?  The pipeline:
//!
//! * [`matrix`] / [`clustering`] / [`matrix_set`]: validated inputs and
//!   structural checks (common influence, cut balance, regime detection).
//! * [`ergodicity`]: cluster ergodicity coefficients and their decay along
//!   matrix products.
//! * [`graph`]: support graphs, reachability, condensations and
//!   cluster-spanning trees.
//! * [`decision`]: the exact decision procedure over pairs of vertex sets
//!   with machine-checkable witnesses for negative verdicts.
//! * [`simulator`]: trajectory simulation used to cross-check every verdict.
//! * [`oracle`]: randomized cross-validation harness wiring the two routes
//!   together.

pub mod clustering;
pub mod decision;
pub mod document;
pub mod ergodicity;
pub mod error;
pub mod generate;
pub mod graph;
pub mod matrix;
pub mod matrix_set;
pub mod oracle;
pub mod simulator;
pub mod vertex_set;

pub use clustering::Clustering;
pub use decision::{
    decide, decide_necessary_only, verify_witness, DecideOptions, DecisionResult, Verdict, Witness,
};
pub use error::{Error, Result};
pub use matrix::{StochasticMatrix, Tolerances};
pub use matrix_set::{AssumptionReport, MatrixSet, Regime};
pub use vertex_set::VertexSet;
