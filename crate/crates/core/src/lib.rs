//! Online graph coloring algorithms and their exact analysis pipelines.
//!
//! The crate is organized around an online instance model ([`stream`]) with
//! brute-force oracles for small graphs ([`oracle`]) and seeded instance
//! generators ([`gen`]). On top of that sit the coloring algorithms:
//!
//! - [`general`]: FirstFit, the unknown-size doubling wrapper, the algorithm
//!   for locally ℓ-colorable graphs, the k-colorable pipeline, and the
//!   competitive wrapper.
//! - [`k4`]: the specialized pipeline for 4-colorable graphs (double greedy,
//!   dense-group division, candidate 1-color sets).
//! - [`bipartite`]: the LST89 component-merging algorithm and its randomized
//!   variant.
//!
//! Two computer-aided analysis pipelines reproduce the numbers that back the
//! bipartite bounds:
//!
//! - [`analyze_upper`]: forest-level distributions and the round-up dynamic
//!   programs bounding the randomized algorithm's color coefficient.
//! - [`analyze_lower`]: exact-rational potentials, the expectimax over
//!   component merges, and the pruned state-matrix searches.
//!
//! Everything randomized takes an explicit seed (ChaCha8); identical seeds
//! replay identical runs.

pub mod analyze_lower;
pub mod analyze_upper;
pub mod bipartite;
pub mod forest;
pub mod gen;
pub mod general;
pub mod k4;
pub mod ledger;
pub mod oracle;
pub mod report;
pub mod stream;
pub mod verify;

pub use ledger::{Color, ColorAllocator, ColoringLedger};
pub use stream::{ArrivalStream, StreamError, VertexId};
