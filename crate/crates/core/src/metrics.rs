//! Operational metrics computed from an assignment trace.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::allocator::Trace;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::policy::PolicyKind;
use crate::scenario::{ClassId, LocalDefault, TierThresholds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Local,
    Regional,
    EnergyOriented,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Local, Tier::Regional, Tier::EnergyOriented];

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Local => "local",
            Tier::Regional => "regional",
            Tier::EnergyOriented => "energy_oriented",
        }
    }
}

/// Classifies a placement by its service-to-compute latency. Both bounds are
/// inclusive.
pub fn tier_of(service_to_compute_ms: f64, t: &TierThresholds) -> Tier {
    if service_to_compute_ms <= t.local_ms {
        Tier::Local
    } else if service_to_compute_ms <= t.regional_ms {
        Tier::Regional
    } else {
        Tier::EnergyOriented
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TierShares {
    pub local: f64,
    pub regional: f64,
    pub energy_oriented: f64,
}

impl TierShares {
    pub fn get(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Local => self.local,
            Tier::Regional => self.regional,
            Tier::EnergyOriented => self.energy_oriented,
        }
    }

    fn add(&mut self, tier: Tier, mass: f64) {
        match tier {
            Tier::Local => self.local += mass,
            Tier::Regional => self.regional += mass,
            Tier::EnergyOriented => self.energy_oriented += mass,
        }
    }

    pub fn sum(&self) -> f64 {
        self.local + self.regional + self.energy_oriented
    }
}

/// Aggregated relocation corridor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flow {
    pub source: String,
    pub destination: String,
    /// Share of the trace's total workload mass.
    pub share: f64,
    /// Mass-weighted net benefit of the corridor's placements.
    pub mean_net_benefit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub policy: PolicyKind,
    pub latency_multiplier: f64,
    pub rid: f64,
    pub total_cost_usd: f64,
    pub total_carbon_g: f64,
    pub total_migration_cost_usd: f64,
    pub cost_reduction_vs_baseline: f64,
    pub carbon_reduction_vs_baseline: f64,
    pub sla_violation_rate: f64,
    pub tier_shares: BTreeMap<ClassId, TierShares>,
    /// Migration spend over electricity plus migration spend.
    pub migration_cost_share: f64,
    pub mean_service_to_compute_ms: f64,
    pub overflow_compute_units: f64,
    pub top_flows: Vec<Flow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Totals {
    pub cost_usd: f64,
    pub carbon_g: f64,
    pub migration_usd: f64,
    pub mass: f64,
}

pub fn totals(trace: &Trace) -> Totals {
    let mut t = Totals::default();
    for p in trace.records.iter().flat_map(|r| &r.placements) {
        t.cost_usd += p.cost.energy_cost_usd;
        t.carbon_g += p.cost.carbon_g;
        t.migration_usd += p.cost.migration_cost_usd;
        t.mass += p.mass;
    }
    t
}

/// Node counted as "local" for a slice when measuring relocation.
pub fn local_default(model: &Model<'_>, class: ClassId, s: usize) -> usize {
    match model.cfg.local_default {
        LocalDefault::Colocated => model.colocated(s),
        LocalDefault::NearestRegion => (0..model.node_count())
            .filter(|&i| model.masks_allow(class, i))
            .min_by(|&a, &b| {
                model
                    .service_to_compute_ms(s, a)
                    .total_cmp(&model.service_to_compute_ms(s, b))
                    .then_with(|| model.node(a).id.cmp(&model.node(b).id))
            })
            .unwrap_or_else(|| model.colocated(s)),
    }
}

/// Energy-weighted share of demand executed away from its local default.
pub fn rid(model: &Model<'_>, trace: &Trace) -> Result<f64> {
    let mut moved = 0.0;
    let mut total = 0.0;
    for r in &trace.records {
        let e = model.class(r.slice.task_class).energy_per_unit_kwh;
        let local = local_default(model, r.slice.task_class, r.service_index);
        for p in &r.placements {
            let energy = e * p.mass;
            total += energy;
            if p.index != local {
                moved += energy;
            }
        }
    }
    if !(total > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    Ok(moved / total)
}

/// `(baseline - policy) / baseline`.
pub fn reduction(policy_total: f64, baseline_total: f64) -> Result<f64> {
    if !(baseline_total > 0.0) {
        return Err(Error::ZeroBaseline("reduction"));
    }
    Ok((baseline_total - policy_total) / baseline_total)
}

/// Mass-weighted share of placed workload whose latency exceeds its budget.
pub fn sla_violation_rate(trace: &Trace) -> f64 {
    let mut late = 0.0;
    let mut total = 0.0;
    for p in trace.records.iter().flat_map(|r| &r.placements) {
        total += p.mass;
        if p.violation {
            late += p.mass;
        }
    }
    if total > 0.0 {
        late / total
    } else {
        0.0
    }
}

/// Mass-weighted tier shares per class. Classes with no mass are omitted.
pub fn tier_shares(trace: &Trace, thresholds: &TierThresholds) -> BTreeMap<ClassId, TierShares> {
    let mut mass: BTreeMap<ClassId, TierShares> = BTreeMap::new();
    for r in &trace.records {
        let entry = mass.entry(r.slice.task_class).or_default();
        for p in &r.placements {
            entry.add(tier_of(p.service_to_compute_ms, thresholds), p.mass);
        }
    }
    mass.into_iter()
        .filter(|(_, m)| m.sum() > 0.0)
        .map(|(c, m)| {
            let total = m.sum();
            (
                c,
                TierShares {
                    local: m.local / total,
                    regional: m.regional / total,
                    energy_oriented: m.energy_oriented / total,
                },
            )
        })
        .collect()
}

/// Largest off-local corridors by share of total mass, ties by (source,
/// destination). Sources are the service node's home region.
pub fn top_flows(model: &Model<'_>, trace: &Trace, n: usize) -> Vec<Flow> {
    let mut corridors: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    let mut total = 0.0;
    for r in &trace.records {
        let home = model.colocated(r.service_index);
        for p in &r.placements {
            total += p.mass;
            if p.index != home {
                let c = corridors.entry((home, p.index)).or_default();
                c.0 += p.mass;
                c.1 += p.mass * p.net_benefit;
            }
        }
    }
    if !(total > 0.0) {
        return Vec::new();
    }
    let mut flows: Vec<Flow> = corridors
        .into_iter()
        .filter(|(_, (m, _))| *m > 0.0)
        .map(|((src, dst), (m, nb))| Flow {
            source: model.node(src).id.clone(),
            destination: model.node(dst).id.clone(),
            share: m / total,
            mean_net_benefit: nb / m,
        })
        .collect();
    flows.sort_by(|a, b| {
        b.share
            .total_cmp(&a.share)
            .then_with(|| a.source.cmp(&b.source))
            .then_with(|| a.destination.cmp(&b.destination))
    });
    flows.truncate(n);
    flows
}

/// Totals at one point of a latency sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub multiplier: f64,
    pub cost: f64,
    pub carbon: f64,
}

/// Finite-difference savings per unit of latency relaxation between two
/// consecutive sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnStep {
    pub from: f64,
    pub to: f64,
    pub erl: f64,
    pub crl: f64,
}

pub fn erl_crl(points: &[SweepPoint]) -> Result<Vec<ReturnStep>> {
    if points.len() < 2 {
        return Err(Error::InvalidSpec(
            "energy/carbon return needs at least two sweep points".into(),
        ));
    }
    points
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let step = b.multiplier - a.multiplier;
            if !(step > 0.0) {
                return Err(Error::UnorderedMultipliers(b.multiplier, a.multiplier));
            }
            Ok(ReturnStep {
                from: a.multiplier,
                to: b.multiplier,
                erl: (a.cost - b.cost) / step,
                crl: (a.carbon - b.carbon) / step,
            })
        })
        .collect()
}

/// Builds the full report. Reductions are measured against `baseline`, or
/// are zero when no baseline is given.
pub fn report(
    model: &Model<'_>,
    trace: &Trace,
    baseline: Option<&Totals>,
    top_n: usize,
) -> Result<MetricsReport> {
    let t = totals(trace);
    let (cost_red, carbon_red) = match baseline {
        Some(b) => (
            reduction(t.cost_usd, b.cost_usd)?,
            reduction(t.carbon_g, b.carbon_g)?,
        ),
        None => (0.0, 0.0),
    };
    let mut lsc_mass = 0.0;
    for p in trace.records.iter().flat_map(|r| &r.placements) {
        lsc_mass += p.service_to_compute_ms * p.mass;
    }
    let spend = t.cost_usd + t.migration_usd;
    Ok(MetricsReport {
        policy: trace.policy,
        latency_multiplier: trace.latency_multiplier,
        rid: rid(model, trace)?,
        total_cost_usd: t.cost_usd,
        total_carbon_g: t.carbon_g,
        total_migration_cost_usd: t.migration_usd,
        cost_reduction_vs_baseline: cost_red,
        carbon_reduction_vs_baseline: carbon_red,
        sla_violation_rate: sla_violation_rate(trace),
        tier_shares: tier_shares(trace, &model.cfg.tier_thresholds),
        migration_cost_share: if spend > 0.0 {
            t.migration_usd / spend
        } else {
            0.0
        },
        mean_service_to_compute_ms: if t.mass > 0.0 { lsc_mass / t.mass } else { 0.0 },
        overflow_compute_units: trace.overflow.iter().map(|o| o.compute_units).sum(),
        top_flows: top_flows(model, trace, top_n),
    })
}
