//! Large deviations of clique and subgraph counts in sparse rank-1
//! inhomogeneous random graphs with Pareto vertex weights.
//!
//! The crate is organised around six pieces:
//!
//! * [`model`]: Pareto weights, the Chung-Lu connection kernel, graph
//!   realization and hub planting.
//! * [`catalog`] and [`counting`]: small pattern graphs, canonical forms,
//!   enumeration of connected patterns and exact copy counting.
//! * [`conditional`]: expected counts conditional on the weight vector.
//! * [`asymptotics`]: closed-form exponents, the hub threshold `c_a(n)`,
//!   hub-contribution integrals, `J(ζ)` and the empirical-tail envelope.
//! * [`optimizer`]: exact solvers for the rate programs `B(H)`, `R(H)` and
//!   the exponential-regime `θ`, plus a lattice oracle.
//! * [`experiments`]: reproducible Monte Carlo drivers used by the CLI.

pub mod asymptotics;
pub mod catalog;
pub mod conditional;
pub mod counting;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod model;
pub mod optimizer;
pub mod quadrature;
pub mod seed;
mod util;

pub use catalog::{automorphism_count, canonical_form, enumerate_connected, SubgraphPattern};
pub use conditional::{ConditionalCount, CountMode};
pub use counting::{count_cliques, count_subgraph_copies, CopyCount};
pub use error::{Error, Result};
pub use graph::GraphSample;
pub use model::{PowerLawParams, WeightVector};
pub use optimizer::{BetaProfile, RateResult};
pub use seed::RandomSeed;
