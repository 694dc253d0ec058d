//! Latency-constrained geographic placement of inference workloads.
//!
//! A scenario describes compute regions with hourly price, carbon, PUE and
//! capacity series, the service nodes where demand arrives, and a set of
//! workload classes with latency budgets. Policies rank the latency-feasible
//! regions for every hourly slice of demand; the allocator pours the slice
//! into that ranking subject to capacity; metrics summarize the resulting
//! trace. The sweep module drives latency, per-class and ablation studies.

// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocator;
pub mod cost;
pub mod defaults;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod latency;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod scenario;
pub mod sweep;
pub mod validate;

pub use allocator::{allocate_hour, run_horizon, AssignmentRecord, Overflow, Placement, Trace};
pub use cost::{
    migration_cost, net_benefit, normalized_objective, raw_objective, CostBreakdown, MigrationCost,
};
pub use defaults::default_scenario;
pub use error::{Error, Result};
pub use feasibility::{feasible_set, FeasibleSet};
pub use metrics::{MetricsReport, Tier, TierShares};
pub use model::Model;
pub use policy::{rank_nodes, Policy, PolicyKind};
pub use scenario::{
    ClassId, ComputeNode, DelayPenaltyMode, FrictionParams, LocalDefault, PolicyWeights, RoundMode,
    ScenarioConfig, ServiceNode, Statefulness, TaskClass, TierThresholds, WorkloadSlice,
};
pub use sweep::{CapacityRegime, FrictionCase, MixPreset, SweepSpec};
pub use validate::{validate_scenario, Finding};
