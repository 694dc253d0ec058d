//! Per-placement economics: electricity, carbon, delay penalty, migration
//! friction, and the raw and normalized objectives built from them.

use serde::Serialize;

use crate::error::Error;
use crate::model::Model;
use crate::scenario::{pair_lookup, ClassId, DelayPenaltyMode, PolicyWeights};

pub fn facility_energy(energy_kwh: f64, pue: f64) -> f64 {
    energy_kwh * pue
}

pub fn energy_cost(energy_kwh: f64, pue: f64, price_per_kwh: f64) -> f64 {
    energy_kwh * pue * price_per_kwh
}

pub fn carbon_cost(energy_kwh: f64, pue: f64, moer: f64) -> f64 {
    energy_kwh * pue * moer
}

pub fn delay_penalty(
    latency_ms: f64,
    budget_ms: f64,
    service_to_compute_ms: f64,
    mode: DelayPenaltyMode,
) -> f64 {
    match mode {
        DelayPenaltyMode::Excess => (latency_ms - budget_ms).max(0.0),
        DelayPenaltyMode::Geographic => service_to_compute_ms,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MigrationCost {
    pub state: f64,
    pub cache: f64,
    pub egress: f64,
    pub replica: f64,
}

impl MigrationCost {
    pub fn total(&self) -> f64 {
        self.state + self.cache + self.egress + self.replica
    }
}

/// Friction of moving `mass` units of `class` from service node `s` to node `i`.
/// Zero when `i` is the service node's own region.
pub fn migration_cost(
    model: &Model<'_>,
    class: ClassId,
    s: usize,
    i: usize,
    mass: f64,
) -> MigrationCost {
    let home = model.colocated(s);
    if i == home {
        return MigrationCost::default();
    }
    let task = model.class(class);
    let fr = &task.friction;
    let factor = model.cfg.statefulness_factors.factor(task.statefulness);
    let egress_price = pair_lookup(
        &model.cfg.egress_price_matrix,
        &model.node(home).id,
        &model.node(i).id,
    )
    .unwrap_or(fr.egress_price_per_gb);
    MigrationCost {
        state: mass * fr.state_cost_per_unit * factor,
        cache: mass * fr.cache_cost_per_unit * factor,
        egress: mass * fr.egress_gb_per_unit * egress_price,
        replica: mass * fr.replica_cost_per_unit,
    }
}

/// Everything the objectives need for one `(class, source, node, hour)` tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub facility_energy_kwh: f64,
    pub energy_cost_usd: f64,
    pub carbon_g: f64,
    pub delay_penalty: f64,
    pub migration: MigrationCost,
    pub migration_cost_usd: f64,
    pub raw_objective: f64,
}

impl CostBreakdown {
    /// Weighted sum of the breakdown's own terms.
    pub fn recompose(&self, w: &PolicyWeights) -> f64 {
        w.alpha * self.energy_cost_usd
            + w.beta * self.carbon_g
            + w.gamma * self.delay_penalty
            + w.eta * self.migration_cost_usd
    }
}

pub fn raw_objective(
    model: &Model<'_>,
    class: ClassId,
    s: usize,
    i: usize,
    hour: usize,
    mass: f64,
    weights: &PolicyWeights,
) -> CostBreakdown {
    let task = model.class(class);
    let energy = task.energy_per_unit_kwh * mass;
    let pue = model.pue(i, hour);
    let lsc = model.service_to_compute_ms(s, i);
    let latency = model.end_to_end_ms(task, s, i);
    let budget = task.effective_budget(model.cfg.latency_multiplier);
    let migration = migration_cost(model, class, s, i, mass);
    let mut b = CostBreakdown {
        facility_energy_kwh: facility_energy(energy, pue),
        energy_cost_usd: energy_cost(energy, pue, model.price(i, hour)),
        carbon_g: carbon_cost(energy, pue, model.moer(i, hour)),
        delay_penalty: delay_penalty(latency, budget, lsc, model.cfg.delay_penalty_mode),
        migration,
        migration_cost_usd: migration.total(),
        raw_objective: 0.0,
    };
    b.raw_objective = b.recompose(weights);
    b
}

/// The four dimensionless terms of the normalized objective, unweighted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizedTerms {
    pub energy: f64,
    pub carbon: f64,
    pub delay: f64,
    pub friction: f64,
}

impl NormalizedTerms {
    pub fn weighted(&self, w: &PolicyWeights) -> f64 {
        w.alpha * self.energy + w.beta * self.carbon + w.gamma * self.delay + w.eta * self.friction
    }
}

/// Terms normalized by the colocated node's energy and carbon cost, the
/// class's effective budget, and (for friction) the colocated energy cost.
pub fn normalized_terms(
    model: &Model<'_>,
    class: ClassId,
    s: usize,
    i: usize,
    hour: usize,
) -> Result<NormalizedTerms, Error> {
    let task = model.class(class);
    let home = model.colocated(s);
    // Per unit of mass; every term is linear in mass so it cancels.
    let e = task.energy_per_unit_kwh;
    let local_energy = energy_cost(e, model.pue(home, hour), model.price(home, hour));
    let local_carbon = carbon_cost(e, model.pue(home, hour), model.moer(home, hour));
    if !(local_energy > 0.0 && local_carbon > 0.0) {
        return Err(Error::DegenerateNormalizer {
            node: model.node(home).id.clone(),
            hour,
        });
    }
    let budget = task.effective_budget(model.cfg.latency_multiplier);
    let lsc = model.service_to_compute_ms(s, i);
    let latency = model.end_to_end_ms(task, s, i);
    let penalty = delay_penalty(latency, budget, lsc, model.cfg.delay_penalty_mode);
    let pue = model.pue(i, hour);
    Ok(NormalizedTerms {
        energy: energy_cost(e, pue, model.price(i, hour)) / local_energy,
        carbon: carbon_cost(e, pue, model.moer(i, hour)) / local_carbon,
        delay: penalty / budget,
        friction: migration_cost(model, class, s, i, 1.0).total() / local_energy,
    })
}

pub fn normalized_objective(
    model: &Model<'_>,
    class: ClassId,
    s: usize,
    i: usize,
    hour: usize,
    weights: &PolicyWeights,
) -> Result<f64, Error> {
    Ok(normalized_terms(model, class, s, i, hour)?.weighted(weights))
}

/// Normalized objective at the colocated node minus that at `i`. Positive
/// means running at `i` beats staying home.
pub fn net_benefit(
    model: &Model<'_>,
    class: ClassId,
    s: usize,
    i: usize,
    hour: usize,
    weights: &PolicyWeights,
) -> Result<f64, Error> {
    let home = model.colocated(s);
    if i == home {
        return Ok(0.0);
    }
    let local = normalized_objective(model, class, s, home, hour, weights)?;
    Ok(local - normalized_objective(model, class, s, i, hour, weights)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn facility_energy_cases() {
        assert_eq!(facility_energy(1.0, 1.0), 1.0);
        assert!((facility_energy(2.0, 1.2) - 2.4).abs() < 1e-15);
        assert_eq!(facility_energy(0.0, 1.7), 0.0);
    }

    #[test]
    fn energy_and_carbon_cost_cases() {
        assert!((energy_cost(1.0, 1.2, 0.10) - 0.12).abs() < 1e-15);
        assert!((carbon_cost(1.0, 1.2, 400.0) - 480.0).abs() < 1e-12);
        assert_eq!(energy_cost(1.0, 1.2, 0.0), 0.0);
        assert_eq!(carbon_cost(1.0, 1.2, 0.0), 0.0);
    }

    #[test]
    fn delay_penalty_modes() {
        use DelayPenaltyMode::*;
        assert_eq!(delay_penalty(250.0, 300.0, 40.0, Excess), 0.0);
        assert_eq!(delay_penalty(350.0, 300.0, 40.0, Excess), 50.0);
        assert_eq!(delay_penalty(350.0, 300.0, 61.1, Geographic), 61.1);
    }
}
