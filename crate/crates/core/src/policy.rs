//! Routing policies and node ranking.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cost::normalized_objective;
use crate::error::Result;
use crate::feasibility::feasible_set;
use crate::model::Model;
use crate::scenario::{ClassId, PolicyWeights, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    LocalOnly,
    NearestRegion,
    PriceOnly,
    CarbonOnly,
    Joint,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::LocalOnly,
        PolicyKind::NearestRegion,
        PolicyKind::PriceOnly,
        PolicyKind::CarbonOnly,
        PolicyKind::Joint,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::LocalOnly => "local_only",
            PolicyKind::NearestRegion => "nearest_region",
            PolicyKind::PriceOnly => "price_only",
            PolicyKind::CarbonOnly => "carbon_only",
            PolicyKind::Joint => "joint",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.as_str() == s || p.as_str().replace('_', "-") == s)
            .ok_or_else(|| {
                format!(
                    "unknown policy `{s}` (expected one of local_only, nearest_region, price_only, carbon_only, joint)"
                )
            })
    }
}

/// A policy plus the weights used for its objective and net-benefit accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Policy {
    pub kind: PolicyKind,
    pub weights: PolicyWeights,
}

impl Policy {
    pub fn new(kind: PolicyKind, weights: PolicyWeights) -> Self {
        Self { kind, weights }
    }

    pub fn from_scenario(kind: PolicyKind, cfg: &ScenarioConfig) -> Self {
        Self::new(kind, cfg.weights)
    }
}

/// Feasible nodes for a slice in the order the policy would fill them.
///
/// Price and carbon rankings use the facility-level rate (`P * PUE`,
/// `MOER * PUE`), which is what a unit of accelerator energy actually costs at
/// that node. Ties go to the lexicographically smaller node id.
pub fn rank_nodes(
    model: &Model<'_>,
    policy: &Policy,
    class: ClassId,
    s: usize,
    hour: usize,
) -> Result<Vec<usize>> {
    let feasible = feasible_set(model, class, s, hour);
    if policy.kind == PolicyKind::LocalOnly {
        let home = model.colocated(s);
        return Ok(feasible.indices().filter(|&i| i == home).collect());
    }

    let task = model.class(class);
    let mut keyed: Vec<(usize, f64)> = Vec::with_capacity(feasible.nodes.len());
    for i in feasible.indices() {
        let key = match policy.kind {
            PolicyKind::LocalOnly => unreachable!(),
            PolicyKind::NearestRegion => model.end_to_end_ms(task, s, i),
            PolicyKind::PriceOnly => model.price(i, hour) * model.pue(i, hour),
            PolicyKind::CarbonOnly => model.moer(i, hour) * model.pue(i, hour),
            PolicyKind::Joint => normalized_objective(model, class, s, i, hour, &policy.weights)?,
        };
        keyed.push((i, key));
    }
    keyed.sort_by(|a, b| by_key_then_id(model, *a, *b));
    Ok(keyed.into_iter().map(|(i, _)| i).collect())
}

fn by_key_then_id(model: &Model<'_>, a: (usize, f64), b: (usize, f64)) -> Ordering {
    a.1.total_cmp(&b.1)
        .then_with(|| model.node(a.0).id.cmp(&model.node(b.0).id))
}
