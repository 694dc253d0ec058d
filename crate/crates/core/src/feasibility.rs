//! Latency- and mask-feasible compute sets.

use serde::Serialize;

use crate::model::Model;
use crate::scenario::ClassId;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibleMember {
    pub node: String,
    #[serde(skip)]
    pub index: usize,
    pub latency_ms: f64,
}

/// Nodes a slice may run on, ascending by end-to-end latency with ties broken
/// by node id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibleSet {
    pub class: ClassId,
    pub service_node: String,
    pub hour: usize,
    pub budget_ms: f64,
    pub nodes: Vec<FeasibleMember>,
}

impl FeasibleSet {
    pub fn contains(&self, node: &str) -> bool {
        self.nodes.iter().any(|m| m.node == node)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().map(|m| m.index)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Feasible set at the scenario's latency multiplier.
pub fn feasible_set(model: &Model<'_>, class: ClassId, s: usize, hour: usize) -> FeasibleSet {
    let budget = model
        .class(class)
        .effective_budget(model.cfg.latency_multiplier);
    feasible_set_with_budget(model, class, s, hour, budget)
}

/// Feasible set for an explicit budget in milliseconds.
pub fn feasible_set_with_budget(
    model: &Model<'_>,
    class: ClassId,
    s: usize,
    hour: usize,
    budget_ms: f64,
) -> FeasibleSet {
    let task = model.class(class);
    let mut nodes: Vec<FeasibleMember> = (0..model.node_count())
        .filter(|&i| model.masks_allow(class, i))
        .map(|i| (i, model.end_to_end_ms(task, s, i)))
        .filter(|&(_, l)| l <= budget_ms)
        .map(|(index, latency_ms)| FeasibleMember {
            node: model.node(index).id.clone(),
            index,
            latency_ms,
        })
        .collect();
    nodes.sort_by(|a, b| {
        a.latency_ms
            .total_cmp(&b.latency_ms)
            .then_with(|| a.node.cmp(&b.node))
    });
    FeasibleSet {
        class,
        service_node: model.service(s).id.clone(),
        hour,
        budget_ms,
        nodes,
    }
}

/// Checks that relaxing the budget from `tau1` to `tau2` only adds nodes.
/// Returns `false` if the caller passes `tau1 > tau2`.
pub fn assert_monotone_expansion(
    model: &Model<'_>,
    class: ClassId,
    s: usize,
    hour: usize,
    tau1_ms: f64,
    tau2_ms: f64,
) -> bool {
    if tau1_ms > tau2_ms {
        return false;
    }
    let small = feasible_set_with_budget(model, class, s, hour, tau1_ms);
    let large = feasible_set_with_budget(model, class, s, hour, tau2_ms);
    small.nodes.iter().all(|m| large.contains(&m.node))
}
