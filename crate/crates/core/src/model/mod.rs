//! Finite-domain LLL instances, partial assignments and exact conditional
//! probabilities.

mod assignment;
mod distribution;
mod instance;
mod predicate;

pub use assignment::PartialAssignment;
pub use distribution::Distribution;
pub use instance::{
    check_criterion, dependency_graph, Criterion, EventSpec, LLLInstance, VariableSpec,
    DEFAULT_ENUM_CAP,
};
pub use predicate::{pb_bound_prob, poisson_binomial, Bound, Predicate, Slot};
