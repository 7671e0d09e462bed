//! Knowledge propagation in synchronous dynamic networks whose round graphs
//! are chosen by an oblivious message adversary.
//!
//! Every process floods the ids it has heard of. After `t` rounds the ids
//! known to `x` are the in-neighbors of `x` in the product `G(t)` of the
//! round graphs (self-loops added). The crate computes broadcast, cover and
//! k-broadcast times, searches for worst-case adversaries at small `n`,
//! builds lower-bound schedules and checks the certificates behind the
//! upper bounds on concrete runs.

pub mod analysis;
pub mod constructions;
pub mod dissemination;
pub mod error;
pub mod families;
pub mod graph;
pub mod format;
pub mod nodeset;
pub mod search;
pub mod trace;
pub mod verify;

pub use dissemination::{run, Objective, Repeat, RoundSequence, RunResult};
pub use error::{Error, Result};
pub use families::{Model, ModelSpec};
pub use graph::Graph;
pub use nodeset::NodeSet;
pub use trace::ProductTrace;
