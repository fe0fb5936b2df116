//! Reduce-and-solve toolkit for the maximum weight independent set problem.
pub mod chils;
pub mod exact;
pub mod flow;
pub mod gnn;
pub mod graph;
pub mod labelgen;
pub mod local_search;
pub mod pipeline;
pub mod profile;
pub mod reductions;
pub mod scheduler;

/// Seed used when a command gets none.
pub const DEFAULT_SEED: u64 = 42;
