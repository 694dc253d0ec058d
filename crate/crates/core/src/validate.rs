use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::scenario::{mask_allows, ClassId, Mask, PairMatrix, ScenarioConfig};

const MIX_TOLERANCE: f64 = 1e-9;

/// One violated scenario invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    /// Stable snake_case identifier of the invariant.
    pub code: &'static str,
    /// Offending entity, e.g. a node id or `class:A`.
    pub entity: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.code, self.entity, self.message)
    }
}

struct Findings(Vec<Finding>);

impl Findings {
    fn push(&mut self, code: &'static str, entity: impl Into<String>, message: impl Into<String>) {
        self.0.push(Finding {
            code,
            entity: entity.into(),
            message: message.into(),
        });
    }
}

/// Checks every scenario invariant. An empty result means the scenario is
/// safe to simulate.
pub fn validate_scenario(cfg: &ScenarioConfig) -> Vec<Finding> {
    let mut f = Findings(Vec::new());
    let t = cfg.horizon_hours;
    if t == 0 {
        f.push(
            "empty_horizon",
            "scenario",
            "horizon_hours must be at least 1",
        );
    }

    check_nodes(cfg, &mut f);
    check_services(cfg, &mut f);
    check_classes(cfg, &mut f);

    if cfg.demand_series.len() != t {
        f.push(
            "series_length_mismatch",
            "demand_series",
            format!("has {} entries, horizon is {t}", cfg.demand_series.len()),
        );
    }
    if cfg
        .demand_series
        .iter()
        .any(|v| !(v.is_finite() && *v >= 0.0))
    {
        f.push(
            "negative_value",
            "demand_series",
            "demand must be finite and >= 0",
        );
    }

    check_pairs(cfg, &cfg.rtt_matrix, "rtt_matrix", &mut f);
    check_pairs(cfg, &cfg.egress_price_matrix, "egress_price_matrix", &mut f);

    if !(cfg.wan_inflation >= 1.0) {
        f.push(
            "wan_inflation_below_1",
            "scenario",
            "wan_inflation must be >= 1",
        );
    }
    if !(cfg.fallback_speed_km_per_ms > 0.0) {
        f.push(
            "nonpositive_speed",
            "scenario",
            "fallback_speed_km_per_ms must be > 0",
        );
    }
    if !(cfg.fallback_overhead_ms >= 0.0) {
        f.push(
            "negative_value",
            "scenario",
            "fallback_overhead_ms must be >= 0",
        );
    }
    if let Some(floor) = cfg.intra_region_floor_ms {
        if !(floor >= 0.0) {
            f.push(
                "negative_value",
                "scenario",
                "intra_region_floor_ms must be >= 0",
            );
        }
    }
    if !(cfg.latency_multiplier > 0.0) {
        f.push(
            "nonpositive_multiplier",
            "scenario",
            "latency_multiplier must be > 0",
        );
    }
    let w = &cfg.weights;
    if [w.alpha, w.beta, w.gamma, w.eta]
        .iter()
        .any(|v| !(*v >= 0.0))
    {
        f.push("negative_weight", "weights", "policy weights must be >= 0");
    }
    let sf = &cfg.statefulness_factors;
    if [sf.low, sf.medium, sf.high].iter().any(|v| !(*v >= 0.0)) {
        f.push(
            "negative_value",
            "statefulness_factors",
            "factors must be >= 0",
        );
    }

    let tiers = &cfg.tier_thresholds;
    if !(tiers.local_ms < tiers.regional_ms) {
        f.push(
            "tier_thresholds_unordered",
            "tier_thresholds",
            "local_ms must be below regional_ms",
        );
    }
    for s in &cfg.service_nodes {
        if cfg.node_index(&s.colocated_compute).is_none() {
            continue;
        }
        let own = crate::latency::service_to_compute_ms_for(cfg, s, &s.colocated_compute);
        if own > tiers.local_ms {
            f.push(
                "own_region_not_local",
                &s.id,
                format!(
                    "latency to colocated node is {own} ms, above the local tier bound {} ms",
                    tiers.local_ms
                ),
            );
        }
    }

    check_mask(cfg, &cfg.legal_mask, "legal_mask", &mut f);
    check_mask(cfg, &cfg.system_mask, "system_mask", &mut f);

    f.0
}

fn check_nodes(cfg: &ScenarioConfig, f: &mut Findings) {
    let t = cfg.horizon_hours;
    if cfg.nodes.is_empty() {
        f.push(
            "no_nodes",
            "scenario",
            "at least one compute node is required",
        );
    }
    let mut seen = BTreeSet::new();
    for n in &cfg.nodes {
        if !seen.insert(n.id.as_str()) {
            f.push("duplicate_id", &n.id, "compute node id is not unique");
        }
        for (name, series) in [
            ("price_series", &n.price_series),
            ("moer_series", &n.moer_series),
            ("pue_series", &n.pue_series),
            ("capacity_series", &n.capacity_series),
        ] {
            if series.len() != t {
                f.push(
                    "series_length_mismatch",
                    &n.id,
                    format!("{name} has {} entries, horizon is {t}", series.len()),
                );
            }
            if series.iter().any(|v| !v.is_finite()) {
                f.push(
                    "non_finite_value",
                    &n.id,
                    format!("{name} contains a non-finite value"),
                );
            }
        }
        if n.pue_series.iter().any(|v| *v < 1.0) {
            f.push("pue_below_1", &n.id, "pue below 1");
        }
        for (name, series) in [
            ("price_series", &n.price_series),
            ("moer_series", &n.moer_series),
            ("capacity_series", &n.capacity_series),
        ] {
            if series.iter().any(|v| *v < 0.0) {
                f.push(
                    "negative_value",
                    &n.id,
                    format!("{name} has a negative value"),
                );
            }
        }
        if !(-90.0..=90.0).contains(&n.latitude) || !(-180.0..=180.0).contains(&n.longitude) {
            f.push(
                "coordinates_out_of_range",
                &n.id,
                "latitude/longitude out of range",
            );
        }
    }
}

fn check_services(cfg: &ScenarioConfig, f: &mut Findings) {
    if cfg.service_nodes.is_empty() {
        f.push(
            "no_service_nodes",
            "scenario",
            "at least one service node is required",
        );
    }
    let mut seen = BTreeSet::new();
    for s in &cfg.service_nodes {
        if !seen.insert(s.id.as_str()) {
            f.push("duplicate_id", &s.id, "service node id is not unique");
        }
        match cfg.nodes.iter().find(|n| n.id == s.colocated_compute) {
            None => f.push(
                "unknown_colocated_node",
                &s.id,
                format!("colocated compute `{}` does not exist", s.colocated_compute),
            ),
            Some(n) => {
                // The joint policy normalises by local cost, which must be positive.
                let zero_price = n.price_series.iter().any(|p| *p <= 0.0);
                let zero_moer = n.moer_series.iter().any(|m| *m <= 0.0);
                if zero_price || zero_moer {
                    f.push(
                        "degenerate_normalizer",
                        &s.id,
                        format!("colocated node `{}` has a zero price or carbon value", n.id),
                    );
                }
            }
        }
        if !(s.demand_weight >= 0.0) {
            f.push("negative_value", &s.id, "demand_weight must be >= 0");
        }
        if !(s.client_latency_ms >= 0.0) {
            f.push("negative_value", &s.id, "client_latency_ms must be >= 0");
        }
    }
    let total: f64 = cfg.service_nodes.iter().map(|s| s.demand_weight).sum();
    if !cfg.service_nodes.is_empty() && !(total > 0.0) {
        f.push(
            "zero_demand_weights",
            "service_nodes",
            "demand weights sum to zero",
        );
    }
}

fn check_classes(cfg: &ScenarioConfig, f: &mut Findings) {
    if cfg.classes.is_empty() {
        f.push(
            "no_classes",
            "scenario",
            "at least one task class is required",
        );
    }
    let min_client = cfg
        .service_nodes
        .iter()
        .map(|s| s.client_latency_ms)
        .fold(f64::INFINITY, f64::min);
    let min_client = if min_client.is_finite() {
        min_client
    } else {
        0.0
    };

    let mut seen = BTreeSet::new();
    for c in &cfg.classes {
        let entity = format!("class:{}", c.id);
        if !seen.insert(c.id) {
            f.push("duplicate_id", &entity, "task class appears twice");
        }
        if c.rounds < 1 {
            f.push("rounds_below_1", &entity, "rounds must be >= 1");
        }
        let fr = &c.friction;
        let magnitudes = [
            c.latency_budget_ms,
            c.energy_per_unit_kwh,
            c.compute_demand,
            c.inference_time_ms,
            c.queueing_time_ms,
            fr.state_cost_per_unit,
            fr.cache_cost_per_unit,
            fr.egress_gb_per_unit,
            fr.egress_price_per_gb,
            fr.replica_cost_per_unit,
        ];
        if magnitudes.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            f.push(
                "negative_value",
                &entity,
                "class magnitudes must be finite and >= 0",
            );
        }
        let floor = c.inference_time_ms + c.queueing_time_ms + min_client;
        if !(c.latency_budget_ms > floor) {
            f.push(
                "budget_unreachable",
                &entity,
                format!(
                    "latency budget {} ms does not exceed inference + queueing + client latency ({floor} ms)",
                    c.latency_budget_ms
                ),
            );
        }
    }

    for c in &cfg.classes {
        if !cfg.class_mix.contains_key(&c.id) {
            f.push(
                "class_mix_missing",
                format!("class:{}", c.id),
                "class has no mix fraction",
            );
        }
    }
    for (id, v) in &cfg.class_mix {
        if cfg.class(*id).is_none() {
            f.push(
                "unknown_class",
                format!("class:{id}"),
                "class_mix names an undefined class",
            );
        }
        if !(*v >= 0.0) {
            f.push(
                "negative_value",
                format!("class:{id}"),
                "class mix fraction must be >= 0",
            );
        }
    }
    let sum: f64 = cfg.class_mix.values().sum();
    if (sum - 1.0).abs() > MIX_TOLERANCE {
        f.push(
            "class_mix_not_normalized",
            "class_mix",
            format!("class mix not normalized (sums to {sum})"),
        );
    }
}

fn check_pairs(cfg: &ScenarioConfig, m: &PairMatrix, name: &str, f: &mut Findings) {
    for (from, row) in m {
        for (to, v) in row {
            for end in [from, to] {
                if cfg.node_index(end).is_none() {
                    f.push("unknown_region", name, format!("unknown region `{end}`"));
                }
            }
            if !(v.is_finite() && *v >= 0.0) {
                f.push("negative_value", name, format!("{from}->{to} must be >= 0"));
            }
        }
    }
}

fn check_mask(cfg: &ScenarioConfig, mask: &Mask, name: &str, f: &mut Findings) {
    for (class, row) in mask {
        if cfg.class(*class).is_none() {
            f.push(
                "unknown_class",
                name,
                format!("mask names undefined class {class}"),
            );
        }
        for node in row.keys() {
            if cfg.node_index(node).is_none() {
                f.push(
                    "unknown_region",
                    name,
                    format!("mask names unknown node `{node}`"),
                );
            }
        }
    }
}

/// True when both masks allow `class` on `node`.
pub fn masks_allow(cfg: &ScenarioConfig, class: ClassId, node: &str) -> bool {
    mask_allows(&cfg.legal_mask, class, node) && mask_allows(&cfg.system_mask, class, node)
}
