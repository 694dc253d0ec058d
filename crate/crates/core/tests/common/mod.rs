#![allow(dead_code)]

use std::collections::BTreeMap;

use geoplace_core::scenario::{
    ClassId, ComputeNode, FrictionParams, ScenarioConfig, ServiceNode, Statefulness, TaskClass,
};

pub struct NodeSpec {
    pub id: &'static str,
    pub lat: f64,
    pub lon: f64,
    pub price: f64,
    pub moer: f64,
    pub pue: f64,
    pub capacity: f64,
}

pub fn node(s: &NodeSpec, hours: usize) -> ComputeNode {
    ComputeNode {
        id: s.id.into(),
        display_name: s.id.into(),
        latitude: s.lat,
        longitude: s.lon,
        price_series: vec![s.price; hours],
        moer_series: vec![s.moer; hours],
        pue_series: vec![s.pue; hours],
        capacity_series: vec![s.capacity; hours],
    }
}

pub fn service(id: &str, home: &str, weight: f64) -> ServiceNode {
    ServiceNode {
        id: id.into(),
        colocated_compute: home.into(),
        client_latency_ms: 10.0,
        demand_weight: weight,
    }
}

pub fn class(id: ClassId, tau: f64, energy: f64, demand: f64) -> TaskClass {
    TaskClass {
        id,
        latency_budget_ms: tau,
        energy_per_unit_kwh: energy,
        compute_demand: demand,
        rounds: 1,
        inference_time_ms: 50.0,
        queueing_time_ms: 0.0,
        statefulness: Statefulness::Low,
        friction: FrictionParams::default(),
    }
}

pub fn scenario(
    nodes: &[NodeSpec],
    services: Vec<ServiceNode>,
    classes: Vec<TaskClass>,
    mix: &[(ClassId, f64)],
    demand: &[f64],
) -> ScenarioConfig {
    let hours = demand.len();
    ScenarioConfig {
        id: "mini".into(),
        synthetic: true,
        horizon_hours: hours,
        nodes: nodes.iter().map(|n| node(n, hours)).collect(),
        service_nodes: services,
        classes,
        class_mix: mix.iter().copied().collect::<BTreeMap<_, _>>(),
        demand_series: demand.to_vec(),
        rtt_matrix: Default::default(),
        egress_price_matrix: Default::default(),
        wan_inflation: 1.0,
        fallback_speed_km_per_ms: 200.0,
        fallback_overhead_ms: 20.0,
        intra_region_floor_ms: Some(1.0),
        round_mode: Default::default(),
        latency_multiplier: 1.0,
        weights: Default::default(),
        delay_penalty_mode: Default::default(),
        legal_mask: Default::default(),
        system_mask: Default::default(),
        tier_thresholds: Default::default(),
        statefulness_factors: Default::default(),
        local_default: Default::default(),
    }
}

pub const BIG: f64 = 1e9;

/// Two regions 4000 km apart: an expensive dirty home and a cheap clean
/// remote. One service node at home, class D only.
pub fn home_and_far() -> ScenarioConfig {
    // 35.97 degrees of longitude along the equator is about 4000 km.
    scenario(
        &[
            NodeSpec {
                id: "home",
                lat: 0.0,
                lon: 0.0,
                price: 0.2,
                moer: 400.0,
                pue: 1.0,
                capacity: BIG,
            },
            NodeSpec {
                id: "far",
                lat: 0.0,
                lon: 35.97,
                price: 0.1,
                moer: 100.0,
                pue: 1.0,
                capacity: BIG,
            },
        ],
        vec![service("s", "home", 1.0)],
        vec![class(ClassId::D, 3_600_000.0, 1.0, 1.0)],
        &[(ClassId::D, 1.0)],
        &[10.0, 10.0],
    )
}

/// Three regions, two service nodes, classes A and D, with a latency-tight
/// class and capacity that binds on the cheapest node.
pub fn three_region() -> ScenarioConfig {
    let mut a = class(ClassId::A, 100.0, 0.5, 0.5);
    a.statefulness = Statefulness::High;
    a.friction = FrictionParams {
        state_cost_per_unit: 0.01,
        cache_cost_per_unit: 0.01,
        egress_gb_per_unit: 0.1,
        egress_price_per_gb: 0.05,
        replica_cost_per_unit: 0.0,
    };
    let mut d = class(ClassId::D, 3_600_000.0, 2.0, 4.0);
    d.friction.egress_gb_per_unit = 0.1;
    d.friction.egress_price_per_gb = 0.02;
    scenario(
        &[
            NodeSpec {
                id: "east",
                lat: 40.0,
                lon: -75.0,
                price: 0.15,
                moer: 400.0,
                pue: 1.2,
                capacity: 60.0,
            },
            NodeSpec {
                id: "west",
                lat: 45.0,
                lon: -120.0,
                price: 0.06,
                moer: 200.0,
                pue: 1.1,
                capacity: 25.0,
            },
            NodeSpec {
                id: "south",
                lat: -23.0,
                lon: -46.0,
                price: 0.08,
                moer: 100.0,
                pue: 1.3,
                capacity: 30.0,
            },
        ],
        vec![service("east", "east", 0.6), service("south", "south", 0.4)],
        vec![a, d],
        &[(ClassId::A, 0.5), (ClassId::D, 0.5)],
        &[20.0, 24.0, 16.0],
    )
}

/// Four close-by regions with varying prices per hour; every node is
/// latency-feasible for class B at multiplier 1.
pub fn diurnal_quad() -> ScenarioConfig {
    let mut b = class(ClassId::B, 400.0, 0.8, 1.0);
    b.statefulness = Statefulness::Medium;
    b.friction = FrictionParams {
        state_cost_per_unit: 0.004,
        cache_cost_per_unit: 0.002,
        egress_gb_per_unit: 0.05,
        egress_price_per_gb: 0.05,
        replica_cost_per_unit: 0.001,
    };
    let mut cfg = scenario(
        &[
            NodeSpec {
                id: "n1",
                lat: 50.0,
                lon: 8.0,
                price: 0.18,
                moer: 420.0,
                pue: 1.25,
                capacity: 40.0,
            },
            NodeSpec {
                id: "n2",
                lat: 51.5,
                lon: 0.0,
                price: 0.16,
                moer: 230.0,
                pue: 1.2,
                capacity: 40.0,
            },
            NodeSpec {
                id: "n3",
                lat: 60.0,
                lon: 10.0,
                price: 0.05,
                moer: 30.0,
                pue: 1.1,
                capacity: 15.0,
            },
            NodeSpec {
                id: "n4",
                lat: 40.0,
                lon: -4.0,
                price: 0.09,
                moer: 180.0,
                pue: 1.3,
                capacity: 20.0,
            },
        ],
        vec![
            service("n1", "n1", 0.5),
            service("n2", "n2", 0.3),
            service("n4", "n4", 0.2),
        ],
        vec![b],
        &[(ClassId::B, 1.0)],
        &[30.0, 40.0, 50.0, 35.0],
    );
    for (k, n) in cfg.nodes.iter_mut().enumerate() {
        for (h, p) in n.price_series.iter_mut().enumerate() {
            *p *= 1.0 + 0.1 * ((h + k) % 3) as f64;
        }
    }
    cfg
}
