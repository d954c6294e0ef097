//! Planning per-packet consistent network updates.
//!
//! Given a topology whose edges are labeled by membership in an initial and
//! a final forwarding configuration, the planners compute rounds of switch
//! updates such that every packet, at every moment, follows either a path of
//! the initial configuration or a path of the final one. The oracle module
//! checks plans and computes exact optima on small instances.

pub mod analysis;
pub mod instances;
pub mod netmodel;
pub mod oracle;
pub mod planner;

pub use analysis::{
    classify_upstream, is_consistent, is_valid, mark_downstream, Consistency, DownMark, Inconsistency, UpstreamClass,
    UpstreamKind, Validity,
};
pub use instances::{fixture, generate, generate_random, Fixture, GenMode, GenParams};
pub use netmodel::{
    parse_instance, parse_instance_with, reduce_multi_source, Configuration, Edge, EdgeLabel, ModelError,
    NetworkInstance, NodeId, ParseOptions,
};
pub use oracle::{search_min_rounds, verify_plan, OracleResult, Regime, Verification, Violation};
pub use planner::{needs_wait, plan_optimal, plan_sequential, PlanMode, PlanStatus, WaitedPlan};
