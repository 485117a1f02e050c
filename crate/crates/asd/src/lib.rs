//! Adaptive sequential discovery: pick unlabeled points one at a time to
//! maximize the sum of collected responses.
//!
//! The crate provides
//!
//! * response environments (linear, logistic, graph-feedback, low-rank
//!   matrix, recorded-dataset replay) and the candidate pools they act on,
//! * posterior engines for each environment family, all projected into a
//!   common sampled representation,
//! * selection policies: information-directed sampling driven by posterior
//!   samples, Thompson sampling, UCB variants, and uniform random,
//! * exact information-theoretic oracles over small discrete models,
//! * graph generators and greedy covering heuristics,
//! * a benchmark harness with paired runs, regret ledgers and CSV output,
//!   plus a replay harness for recorded datasets,
//! * the `asd` command-line front end.
//!
//! Every random draw flows from explicit seeds, so any experiment is
//! reproducible byte for byte from its resolved configuration.

pub mod bench;
pub mod cli;
pub mod env;
pub mod error;
pub mod graph;
pub mod infotheory;
pub mod policies;
pub mod pool;
pub mod posterior;
pub mod regret;
pub mod replay;
pub mod rng;

pub use error::{Error, Result};
