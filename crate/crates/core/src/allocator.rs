//! Hourly capacity-constrained allocation.
//!
//! Slices are processed class A to D, then by service node id. Each slice
//! pours its mass into the policy's ranked nodes, moving on when a node's
//! remaining capacity for the hour runs out. Mass that finds no room is
//! forced onto the service node's own region; whatever exceeds that node's
//! remaining capacity is reported as overflow.

use serde::Serialize;

use crate::cost::{net_benefit, raw_objective, CostBreakdown};
use crate::error::Result;
use crate::model::Model;
use crate::policy::{rank_nodes, Policy, PolicyKind};
use crate::scenario::{build_slices, WorkloadSlice};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Placement {
    pub node: String,
    #[serde(skip)]
    pub index: usize,
    /// Share of the slice's mass; sums to 1 over a record.
    pub fraction: f64,
    pub mass: f64,
    pub latency_ms: f64,
    pub service_to_compute_ms: f64,
    pub cost: CostBreakdown,
    /// Normalized local objective minus this node's, at placement time.
    pub net_benefit: f64,
    pub violation: bool,
    /// Some of this mass was forced here after ranked nodes ran out.
    pub forced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignmentRecord {
    pub slice: WorkloadSlice,
    #[serde(skip)]
    pub service_index: usize,
    pub placements: Vec<Placement>,
    pub violation_flag: bool,
}

/// Compute-units placed on a node beyond its hourly capacity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Overflow {
    pub hour: usize,
    pub node: String,
    pub compute_units: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct HourAllocation {
    pub records: Vec<AssignmentRecord>,
    pub overflow: Vec<Overflow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub policy: PolicyKind,
    pub latency_multiplier: f64,
    pub records: Vec<AssignmentRecord>,
    pub overflow: Vec<Overflow>,
}

/// Splits `demand` compute-units over `ranked` nodes in order, drawing down
/// `capacity_left`. Returns `(node, fraction)` pairs and the unplaced fraction.
pub fn pour(ranked: &[usize], demand: f64, capacity_left: &mut [f64]) -> (Vec<(usize, f64)>, f64) {
    let mut placed = Vec::new();
    let mut remaining = 1.0;
    if demand <= 0.0 {
        if let Some(&first) = ranked.first() {
            placed.push((first, 1.0));
            remaining = 0.0;
        }
        return (placed, remaining);
    }
    for &i in ranked {
        let avail = capacity_left[i];
        if avail <= 0.0 {
            continue;
        }
        let need = demand * remaining;
        if avail >= need {
            capacity_left[i] -= need;
            placed.push((i, remaining));
            remaining = 0.0;
            break;
        }
        let f = avail / demand;
        capacity_left[i] = 0.0;
        placed.push((i, f));
        remaining -= f;
    }
    (placed, remaining.max(0.0))
}

pub fn allocate_hour(
    model: &Model<'_>,
    slices: &[WorkloadSlice],
    policy: &Policy,
    hour: usize,
) -> Result<HourAllocation> {
    let mut order: Vec<(usize, &WorkloadSlice)> = slices.iter().enumerate().collect();
    order.sort_by(|(ia, a), (ib, b)| {
        a.task_class
            .cmp(&b.task_class)
            .then_with(|| a.service_node.cmp(&b.service_node))
            .then_with(|| ia.cmp(ib))
    });

    let mut capacity_left: Vec<f64> = (0..model.node_count())
        .map(|i| model.capacity(i, hour))
        .collect();
    let mut overflow = vec![0.0; model.node_count()];
    let mut records = Vec::with_capacity(slices.len());

    for (_, slice) in order {
        let s = model
            .service_index(&slice.service_node)
            .unwrap_or_else(|| panic!("unknown service node `{}`", slice.service_node));
        let class = model.class(slice.task_class);
        let home = model.colocated(s);
        let demand = class.compute_demand * slice.mass;

        let ranked = rank_nodes(model, policy, slice.task_class, s, hour)?;
        let (mut shares, remaining) = pour(&ranked, demand, &mut capacity_left);
        let mut forced_here = false;
        if remaining > 0.0 {
            forced_here = true;
            let need = demand * remaining;
            let within = capacity_left[home].min(need).max(0.0);
            capacity_left[home] -= within;
            overflow[home] += need - within;
            match shares.iter_mut().find(|(i, _)| *i == home) {
                Some((_, f)) => *f += remaining,
                None => shares.push((home, remaining)),
            }
        }

        let budget = class.effective_budget(model.cfg.latency_multiplier);
        let mut placements = Vec::with_capacity(shares.len());
        for (i, fraction) in shares {
            let mass = slice.mass * fraction;
            let latency_ms = model.end_to_end_ms(class, s, i);
            placements.push(Placement {
                node: model.node(i).id.clone(),
                index: i,
                fraction,
                mass,
                latency_ms,
                service_to_compute_ms: model.service_to_compute_ms(s, i),
                cost: raw_objective(model, slice.task_class, s, i, hour, mass, &policy.weights),
                net_benefit: net_benefit(model, slice.task_class, s, i, hour, &policy.weights)?,
                violation: latency_ms > budget,
                forced: forced_here && i == home,
            });
        }
        let violation_flag = placements.iter().any(|p| p.violation && p.mass > 0.0);
        records.push(AssignmentRecord {
            slice: slice.clone(),
            service_index: s,
            placements,
            violation_flag,
        });
    }

    let overflow = overflow
        .into_iter()
        .enumerate()
        .filter(|(_, units)| *units > 0.0)
        .map(|(i, compute_units)| Overflow {
            hour,
            node: model.node(i).id.clone(),
            compute_units,
        })
        .collect();
    Ok(HourAllocation { records, overflow })
}

/// Allocates every hour of the horizon in turn.
pub fn run_horizon(model: &Model<'_>, policy: &Policy) -> Result<Trace> {
    let mut records = Vec::new();
    let mut overflow = Vec::new();
    for hour in 0..model.cfg.horizon_hours {
        let slices = build_slices(model.cfg, hour);
        let mut h = allocate_hour(model, &slices, policy, hour)?;
        records.append(&mut h.records);
        overflow.append(&mut h.overflow);
    }
    Ok(Trace {
        policy: policy.kind,
        latency_multiplier: model.cfg.latency_multiplier,
        records,
        overflow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pour_fills_in_rank_order() {
        let mut cap = vec![5.0, 3.0, 100.0];
        let (shares, rem) = pour(&[1, 0, 2], 10.0, &mut cap);
        let want = [(1, 0.3), (0, 0.5), (2, 0.2)];
        assert_eq!(shares.len(), want.len());
        for ((i, f), (wi, wf)) in shares.iter().zip(want) {
            assert_eq!(*i, wi);
            assert!((f - wf).abs() < 1e-12);
        }
        assert!(rem.abs() < 1e-15);
        assert_eq!(cap[0], 0.0);
        assert_eq!(cap[1], 0.0);
        assert!((cap[2] - 98.0).abs() < 1e-12);
    }

    #[test]
    fn pour_skips_zero_capacity_and_reports_leftover() {
        let mut cap = vec![0.0, 4.0];
        let (shares, rem) = pour(&[0, 1], 8.0, &mut cap);
        assert_eq!(shares, vec![(1, 0.5)]);
        assert_eq!(rem, 0.5);
    }

    #[test]
    fn pour_of_nothing_lands_on_first_rank() {
        let mut cap = vec![0.0, 0.0];
        assert_eq!(pour(&[1, 0], 0.0, &mut cap), (vec![(1, 1.0)], 0.0));
        assert_eq!(pour(&[], 0.0, &mut cap), (vec![], 1.0));
    }
}
