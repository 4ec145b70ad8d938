//! Deterministic random walk on undirected graphs.
//!
//! A fixed fraction `p` of the walker mass on every node leaves each tick and
//! is split equally among the node's neighbors. Starting from mass placed on a
//! few random seed nodes, the state converges to a degree-proportional
//! equilibrium; the tick at which a least-squares fit of mass against degree
//! first reaches `R² ≥ 0.99` is the *saturation time*.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computation:
//!
//! - [`graph`]: the [`Graph`] type, Erdős–Rényi and Barabási–Albert
//!   generators, giant-component extraction, hub counting.
//! - [`dynamics`]: the diffusion update, the stationary prediction and
//!   [`run_to_saturation`](dynamics::run_to_saturation).
//! - [`stats`]: least squares, skewness, percentiles and Pearson correlation.
//! - [`seed`]: the seed-derivation function used by ensemble runs.
//!
//! File formats, the experiment harness, the CLI and the session server live
//! in the `netwalk` crate.
#![no_std]
#![deny(missing_docs)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod graph;
pub mod seed;
pub mod stats;

pub use dynamics::{
    init_state, r2_vs_degree, run_to_saturation, stationary_prediction, step, DynamicsError,
    RegressionPopulation, SimConfig, SimResult, WalkerState,
};
pub use graph::{
    count_hubs, degree_histogram, generate, generate_ba, generate_er, giant_component, Graph,
    GraphError, GraphSpec, Model,
};
pub use stats::{RegressionFit, SampleSummary, StatsError};
