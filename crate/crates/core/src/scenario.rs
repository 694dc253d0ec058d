//! Scenario description: regions, service ingress points, workload classes and
//! every knob of a run.
//!
//! A [`ScenarioConfig`] is plain data. It mirrors the JSON scenario file field
//! for field, so `serde` is the only parser. Omitted optional fields take the
//! defaults declared on each field.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Workload archetype, ordered from the most to the least latency sensitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassId {
    A,
    B,
    C,
    D,
}

impl ClassId {
    pub const ALL: [ClassId; 4] = [ClassId::A, ClassId::B, ClassId::C, ClassId::D];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassId::A => "A",
            ClassId::B => "B",
            ClassId::C => "C",
            ClassId::D => "D",
        }
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(ClassId::A),
            "B" | "b" => Ok(ClassId::B),
            "C" | "c" => Ok(ClassId::C),
            "D" | "d" => Ok(ClassId::D),
            other => Err(format!("unknown task class `{other}`")),
        }
    }
}

/// How much session state a class carries; scales the state and cache
/// components of migration cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statefulness {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatefulnessFactors {
    pub low: f64,
    pub medium: f64,
    pub high: f64,
}

impl Default for StatefulnessFactors {
    fn default() -> Self {
        Self {
            low: 0.0,
            medium: 0.5,
            high: 1.0,
        }
    }
}

impl StatefulnessFactors {
    pub fn factor(&self, s: Statefulness) -> f64 {
        match s {
            Statefulness::Low => self.low,
            Statefulness::Medium => self.medium,
            Statefulness::High => self.high,
        }
    }
}

/// Per-unit cost of running a class away from its ingress region.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionParams {
    /// $ per workload unit, before the statefulness factor.
    pub state_cost_per_unit: f64,
    /// $ per workload unit, before the statefulness factor.
    pub cache_cost_per_unit: f64,
    pub egress_gb_per_unit: f64,
    /// Fallback $/GB when the scenario has no egress price for the region pair.
    pub egress_price_per_gb: f64,
    pub replica_cost_per_unit: f64,
}

impl FrictionParams {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            state_cost_per_unit: self.state_cost_per_unit * factor,
            cache_cost_per_unit: self.cache_cost_per_unit * factor,
            egress_gb_per_unit: self.egress_gb_per_unit * factor,
            egress_price_per_gb: self.egress_price_per_gb,
            replica_cost_per_unit: self.replica_cost_per_unit * factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskClass {
    pub id: ClassId,
    pub latency_budget_ms: f64,
    pub energy_per_unit_kwh: f64,
    /// Compute-units consumed per workload unit.
    pub compute_demand: f64,
    pub rounds: u32,
    pub inference_time_ms: f64,
    #[serde(default)]
    pub queueing_time_ms: f64,
    pub statefulness: Statefulness,
    pub friction: FrictionParams,
}

impl TaskClass {
    /// Latency budget after applying a system-wide multiplier.
    pub fn effective_budget(&self, latency_multiplier: f64) -> f64 {
        effective_budget(self.latency_budget_ms, latency_multiplier)
    }
}

pub fn effective_budget(latency_budget_ms: f64, latency_multiplier: f64) -> f64 {
    latency_budget_ms * latency_multiplier
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeNode {
    pub id: String,
    pub display_name: String,
    pub latitude: f64,
    pub longitude: f64,
    /// $/kWh per hour.
    pub price_series: Vec<f64>,
    /// gCO2eq/kWh per hour.
    pub moer_series: Vec<f64>,
    pub pue_series: Vec<f64>,
    /// Compute-units per hour.
    pub capacity_series: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceNode {
    pub id: String,
    pub colocated_compute: String,
    pub client_latency_ms: f64,
    pub demand_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta: f64,
}

impl Default for PolicyWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            eta: 1.0,
        }
    }
}

impl PolicyWeights {
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            alpha: self.alpha * k,
            beta: self.beta * k,
            gamma: self.gamma * k,
            eta: self.eta * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayPenaltyMode {
    /// `max(0, L - tau)`.
    Excess,
    /// The service-to-compute latency itself.
    #[default]
    Geographic,
}

/// How the `rounds` of a class are charged against service-to-compute latency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundMode {
    /// One one-way hop per round.
    #[default]
    OneWay,
    /// A full round trip per round.
    RoundTrip,
}

/// Which node counts as "local" when measuring relocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalDefault {
    #[default]
    Colocated,
    NearestRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierThresholds {
    pub local_ms: f64,
    pub regional_ms: f64,
}

impl Default for TierThresholds {
    fn default() -> Self {
        Self {
            local_ms: 15.0,
            regional_ms: 80.0,
        }
    }
}

/// Region to region values in milliseconds or $/GB, keyed by ordered pair.
pub type PairMatrix = BTreeMap<String, BTreeMap<String, f64>>;

/// Sparse `(class, node) -> allowed` overrides; absent entries are allowed.
pub type Mask = BTreeMap<ClassId, BTreeMap<String, bool>>;

pub fn pair_lookup(m: &PairMatrix, from: &str, to: &str) -> Option<f64> {
    m.get(from).and_then(|row| row.get(to)).copied()
}

pub fn mask_allows(mask: &Mask, class: ClassId, node: &str) -> bool {
    mask.get(&class)
        .and_then(|row| row.get(node))
        .copied()
        .unwrap_or(true)
}

fn default_one() -> f64 {
    1.0
}
fn default_fallback_speed() -> f64 {
    200.0
}
fn default_fallback_overhead() -> f64 {
    20.0
}
fn default_floor() -> Option<f64> {
    Some(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    /// Marks scenarios whose series are generated rather than measured.
    #[serde(default)]
    pub synthetic: bool,
    pub horizon_hours: usize,
    pub nodes: Vec<ComputeNode>,
    pub service_nodes: Vec<ServiceNode>,
    pub classes: Vec<TaskClass>,
    pub class_mix: BTreeMap<ClassId, f64>,
    /// Total workload units arriving per hour, before the regional split.
    pub demand_series: Vec<f64>,
    #[serde(default)]
    pub rtt_matrix: PairMatrix,
    /// $/GB per ordered region pair; missing pairs use the class default.
    #[serde(default)]
    pub egress_price_matrix: PairMatrix,
    #[serde(default = "default_one")]
    pub wan_inflation: f64,
    #[serde(default = "default_fallback_speed")]
    pub fallback_speed_km_per_ms: f64,
    #[serde(default = "default_fallback_overhead")]
    pub fallback_overhead_ms: f64,
    /// Latency charged for a service node talking to its own region. `null`
    /// disables the floor and treats the pair like any other.
    #[serde(default = "default_floor")]
    pub intra_region_floor_ms: Option<f64>,
    #[serde(default)]
    pub round_mode: RoundMode,
    #[serde(default = "default_one")]
    pub latency_multiplier: f64,
    #[serde(default)]
    pub weights: PolicyWeights,
    #[serde(default)]
    pub delay_penalty_mode: DelayPenaltyMode,
    #[serde(default)]
    pub legal_mask: Mask,
    #[serde(default)]
    pub system_mask: Mask,
    #[serde(default)]
    pub tier_thresholds: TierThresholds,
    #[serde(default)]
    pub statefulness_factors: StatefulnessFactors,
    #[serde(default)]
    pub local_default: LocalDefault,
}

impl ScenarioConfig {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn service_index(&self, id: &str) -> Option<usize> {
        self.service_nodes.iter().position(|s| s.id == id)
    }

    pub fn class(&self, id: ClassId) -> Option<&TaskClass> {
        self.classes.iter().find(|c| c.id == id)
    }

    pub fn class_index(&self, id: ClassId) -> Option<usize> {
        self.classes.iter().position(|c| c.id == id)
    }

    pub fn with_multiplier(&self, latency_multiplier: f64) -> Self {
        Self {
            latency_multiplier,
            ..self.clone()
        }
    }

    /// Total compute-units requested in `hour` across all slices.
    pub fn hourly_compute_demand(&self, hour: usize) -> f64 {
        let weight_sum: f64 = self.service_nodes.iter().map(|s| s.demand_weight).sum();
        if weight_sum <= 0.0 {
            return 0.0;
        }
        let per_unit: f64 = self
            .classes
            .iter()
            .map(|c| self.class_mix.get(&c.id).copied().unwrap_or(0.0) * c.compute_demand)
            .sum();
        self.demand_series.get(hour).copied().unwrap_or(0.0) * per_unit
    }
}

/// Divisible workload mass for one `(hour, service node, class)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSlice {
    pub hour: usize,
    pub service_node: String,
    pub task_class: ClassId,
    pub mass: f64,
}

/// Splits the hour's demand into slices, ordered by class then service id.
/// Zero-mass cells are skipped.
pub fn build_slices(cfg: &ScenarioConfig, hour: usize) -> Vec<WorkloadSlice> {
    let total = cfg.demand_series.get(hour).copied().unwrap_or(0.0);
    let weight_sum: f64 = cfg.service_nodes.iter().map(|s| s.demand_weight).sum();
    if total <= 0.0 || weight_sum <= 0.0 {
        return Vec::new();
    }
    let mut services: Vec<&ServiceNode> = cfg.service_nodes.iter().collect();
    services.sort_by(|a, b| a.id.cmp(&b.id));
    let mut classes: Vec<ClassId> = cfg.classes.iter().map(|c| c.id).collect();
    classes.sort();

    let mut out = Vec::with_capacity(classes.len() * services.len());
    for class in classes {
        let mix = cfg.class_mix.get(&class).copied().unwrap_or(0.0);
        for s in &services {
            let mass = total * mix * s.demand_weight / weight_sum;
            if mass > 0.0 {
                out.push(WorkloadSlice {
                    hour,
                    service_node: s.id.clone(),
                    task_class: class,
                    mass,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(tau: f64) -> TaskClass {
        TaskClass {
            id: ClassId::A,
            latency_budget_ms: tau,
            energy_per_unit_kwh: 1.0,
            compute_demand: 1.0,
            rounds: 1,
            inference_time_ms: 50.0,
            queueing_time_ms: 0.0,
            statefulness: Statefulness::High,
            friction: FrictionParams::default(),
        }
    }

    #[test]
    fn effective_budget_scales_tau() {
        assert_eq!(class(200.0).effective_budget(1.0), 200.0);
        assert_eq!(class(200.0).effective_budget(1.5), 300.0);
        assert_eq!(class(1000.0).effective_budget(0.5), 500.0);
    }

    #[test]
    fn class_id_round_trips_through_str() {
        for c in ClassId::ALL {
            assert_eq!(c.as_str().parse::<ClassId>().unwrap(), c);
        }
        assert!("E".parse::<ClassId>().is_err());
    }

    #[test]
    fn masks_default_to_allowed() {
        let mut mask = Mask::new();
        assert!(mask_allows(&mask, ClassId::B, "virginia"));
        mask.entry(ClassId::B)
            .or_default()
            .insert("virginia".into(), false);
        assert!(!mask_allows(&mask, ClassId::B, "virginia"));
        assert!(mask_allows(&mask, ClassId::A, "virginia"));
    }
}
