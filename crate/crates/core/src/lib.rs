//! Distance to hereditary graph properties through reduced graphs.
//!
//! A hereditary property is `Forb(F)`: graphs with no induced copy of any
//! pattern in a finite family `F`. This crate computes the quantities needed
//! to reason about, and estimate, the normalized edit distance of a dense
//! graph to such a property:
//!
//! - [`graph`]: simple graphs and complete weighted graphs with loops.
//! - [`partition`]: equipartitions (class sizes differ by at most one).
//! - [`quotient`]: reduced graphs `G/V`, blown-up reduced graphs, almost
//!   reducibility and the edge-rounding construction.
//! - [`hom`]: induced homomorphism weights and densities, exact (float and
//!   rational) or Monte-Carlo, plus induced-copy search.
//! - [`metrics`]: edit distance, weighted `d1`, cut distance and the exact
//!   distance to `Forb(F)` for small graphs.
//! - [`regularity`]: a constructive Frieze-Kannan weak regular partition.
//! - [`estimator`]: sample-and-solve and codebook estimators, the constant
//!   calculator for the removal-lemma route, and the removal probe.
//! - [`checks`]: the inequality suites, packaged so that a CLI can run them.
//!
//! Every randomized operation takes an explicit `u64` seed and uses
//! ChaCha8, so results are reproducible across platforms.

#![forbid(unsafe_code)]

pub mod checks;
pub mod error;
pub mod estimator;
pub mod graph;
pub mod hom;
pub mod io;
pub mod metrics;
pub mod partition;
pub mod quotient;
pub mod regularity;
pub mod rng;

pub use error::{Error, Result};
pub use estimator::{AttestationCodebook, EstimateReport, PropertySpec, RemovalConstants};
pub use graph::{Graph, WeightedGraph};
pub use partition::Equipartition;
pub use regularity::FkResult;
