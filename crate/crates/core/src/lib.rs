//! Simulation of distributed Lovász Local Lemma algorithms in the LOCAL
//! model, with network decompositions, shattering and three coloring
//! pipelines built on top.

pub mod colorings;
pub mod decomp;
pub mod error;
pub mod generators;
pub mod graph;
pub mod instances;
pub mod model;
pub mod runtime;
pub mod solvers;

pub use error::{Error, Result};
pub use graph::{Graph, NodeSubset};
pub use model::{LLLInstance, PartialAssignment};
pub use runtime::{RoundLedger, SeedContext};
