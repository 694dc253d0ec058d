//! The bundled ten-region scenario.
//!
//! Everything here is synthetic: price and carbon series are diurnal
//! sinusoids around per-region means, capacity is a fixed share of mean
//! hourly compute demand, and the RTT table is an approximate public-cloud
//! subset with Beijing pairs left to the distance fallback.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::scenario::{
    ClassId, ComputeNode, FrictionParams, PairMatrix, PolicyWeights, ScenarioConfig, ServiceNode,
    Statefulness, TaskClass,
};

pub const DEFAULT_SCENARIO_ID: &str = "default-10-region";
pub const DEFAULT_HORIZON_HOURS: usize = 168;
/// Workload units arriving per hour on average.
pub const MEAN_HOURLY_DEMAND: f64 = 1000.0;
const DEMAND_SWING: f64 = 0.2;
const PRICE_SWING: f64 = 0.15;

struct Region {
    id: &'static str,
    name: &'static str,
    lat: f64,
    lon: f64,
    price: f64,
    moer: f64,
    moer_amp: f64,
    pue: f64,
    demand_weight: f64,
    capacity_share: f64,
    continent: Continent,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Continent {
    NorthAmerica,
    Europe,
    Asia,
    MiddleEast,
    Oceania,
    SouthAmerica,
}

#[rustfmt::skip]
const REGIONS: [Region; 10] = [
    Region { id: "virginia",  name: "Virginia",  lat: 38.95,  lon: -77.45,  price: 0.085, moer: 380.0, moer_amp: 0.20, pue: 1.20, demand_weight: 0.18, capacity_share: 0.25, continent: Continent::NorthAmerica },
    Region { id: "oregon",    name: "Oregon",    lat: 45.60,  lon: -121.18, price: 0.060, moer: 250.0, moer_amp: 0.30, pue: 1.15, demand_weight: 0.08, capacity_share: 0.35, continent: Continent::NorthAmerica },
    Region { id: "frankfurt", name: "Frankfurt", lat: 50.11,  lon: 8.68,    price: 0.180, moer: 420.0, moer_amp: 0.25, pue: 1.25, demand_weight: 0.08, capacity_share: 0.10, continent: Continent::Europe },
    Region { id: "london",    name: "London",    lat: 51.51,  lon: -0.13,   price: 0.160, moer: 230.0, moer_amp: 0.30, pue: 1.25, demand_weight: 0.12, capacity_share: 0.12, continent: Continent::Europe },
    Region { id: "singapore", name: "Singapore", lat: 1.35,   lon: 103.82,  price: 0.150, moer: 480.0, moer_amp: 0.10, pue: 1.35, demand_weight: 0.12, capacity_share: 0.12, continent: Continent::Asia },
    Region { id: "tokyo",     name: "Tokyo",     lat: 35.68,  lon: 139.69,  price: 0.170, moer: 470.0, moer_amp: 0.15, pue: 1.30, demand_weight: 0.12, capacity_share: 0.12, continent: Continent::Asia },
    Region { id: "dubai",     name: "Dubai",     lat: 25.20,  lon: 55.27,   price: 0.070, moer: 450.0, moer_amp: 0.10, pue: 1.40, demand_weight: 0.06, capacity_share: 0.20, continent: Continent::MiddleEast },
    Region { id: "sydney",    name: "Sydney",    lat: -33.87, lon: 151.21,  price: 0.100, moer: 550.0, moer_amp: 0.40, pue: 1.25, demand_weight: 0.06, capacity_share: 0.10, continent: Continent::Oceania },
    Region { id: "beijing",   name: "Beijing",   lat: 39.90,  lon: 116.40,  price: 0.080, moer: 580.0, moer_amp: 0.15, pue: 1.35, demand_weight: 0.12, capacity_share: 0.14, continent: Continent::Asia },
    Region { id: "sao_paulo", name: "São Paulo", lat: -23.55, lon: -46.63,  price: 0.075, moer: 120.0, moer_amp: 0.25, pue: 1.30, demand_weight: 0.06, capacity_share: 0.30, continent: Continent::SouthAmerica },
];

/// Round-trip times in ms; each pair is written in both directions.
#[rustfmt::skip]
const RTT_MS: &[(&str, &str, f64)] = &[
    ("virginia", "oregon", 67.0),
    ("virginia", "frankfurt", 88.0),
    ("virginia", "london", 76.0),
    ("virginia", "singapore", 215.0),
    ("virginia", "tokyo", 150.0),
    ("virginia", "dubai", 190.0),
    ("virginia", "sydney", 200.0),
    ("virginia", "sao_paulo", 118.0),
    ("oregon", "frankfurt", 145.0),
    ("oregon", "london", 135.0),
    ("oregon", "singapore", 165.0),
    ("oregon", "tokyo", 98.0),
    ("oregon", "dubai", 230.0),
    ("oregon", "sydney", 140.0),
    ("oregon", "sao_paulo", 175.0),
    ("frankfurt", "london", 15.0),
    ("frankfurt", "singapore", 155.0),
    ("frankfurt", "tokyo", 225.0),
    ("frankfurt", "dubai", 110.0),
    ("frankfurt", "sydney", 245.0),
    ("frankfurt", "sao_paulo", 200.0),
    ("london", "singapore", 165.0),
    ("london", "tokyo", 215.0),
    ("london", "dubai", 115.0),
    ("london", "sydney", 255.0),
    ("london", "sao_paulo", 185.0),
    ("singapore", "tokyo", 70.0),
    ("singapore", "dubai", 95.0),
    ("singapore", "sydney", 90.0),
    ("singapore", "sao_paulo", 320.0),
    ("tokyo", "dubai", 140.0),
    ("tokyo", "sydney", 110.0),
    ("tokyo", "sao_paulo", 255.0),
    ("dubai", "sydney", 175.0),
    ("dubai", "sao_paulo", 290.0),
    ("sydney", "sao_paulo", 300.0),
];

const EGRESS_SAME_CONTINENT: f64 = 0.02;
const EGRESS_FROM_NA_EU: f64 = 0.05;
const EGRESS_FROM_OTHER: f64 = 0.08;

pub const CLASS_MIX: [(ClassId, f64); 4] = [
    (ClassId::A, 0.35),
    (ClassId::B, 0.30),
    (ClassId::C, 0.20),
    (ClassId::D, 0.15),
];

pub fn default_classes() -> Vec<TaskClass> {
    vec![
        TaskClass {
            id: ClassId::A,
            latency_budget_ms: 200.0,
            energy_per_unit_kwh: 0.25,
            compute_demand: 0.5,
            rounds: 1,
            inference_time_ms: 50.0,
            queueing_time_ms: 0.0,
            statefulness: Statefulness::High,
            friction: FrictionParams {
                state_cost_per_unit: 0.03,
                cache_cost_per_unit: 0.02,
                egress_gb_per_unit: 0.05,
                egress_price_per_gb: 0.05,
                replica_cost_per_unit: 0.005,
            },
        },
        TaskClass {
            id: ClassId::B,
            latency_budget_ms: 1000.0,
            energy_per_unit_kwh: 0.5,
            compute_demand: 1.0,
            rounds: 2,
            inference_time_ms: 400.0,
            queueing_time_ms: 0.0,
            statefulness: Statefulness::Medium,
            friction: FrictionParams {
                state_cost_per_unit: 0.16,
                cache_cost_per_unit: 0.08,
                egress_gb_per_unit: 0.1,
                egress_price_per_gb: 0.05,
                replica_cost_per_unit: 0.004,
            },
        },
        TaskClass {
            id: ClassId::C,
            latency_budget_ms: 30_000.0,
            energy_per_unit_kwh: 1.5,
            compute_demand: 3.0,
            rounds: 5,
            inference_time_ms: 500.0,
            queueing_time_ms: 0.0,
            statefulness: Statefulness::Medium,
            friction: FrictionParams {
                state_cost_per_unit: 0.04,
                cache_cost_per_unit: 0.03,
                egress_gb_per_unit: 2.0,
                egress_price_per_gb: 0.05,
                replica_cost_per_unit: 0.01,
            },
        },
        TaskClass {
            id: ClassId::D,
            latency_budget_ms: 3_600_000.0,
            energy_per_unit_kwh: 2.0,
            compute_demand: 4.0,
            rounds: 3,
            inference_time_ms: 5000.0,
            queueing_time_ms: 0.0,
            statefulness: Statefulness::Low,
            friction: FrictionParams {
                state_cost_per_unit: 0.02,
                cache_cost_per_unit: 0.01,
                egress_gb_per_unit: 0.1,
                egress_price_per_gb: 0.05,
                replica_cost_per_unit: 0.005,
            },
        },
    ]
}

const CLIENT_LATENCY_MS: f64 = 10.0;

fn diurnal(mean: f64, amp: f64, hour: usize, phase_hours: f64) -> f64 {
    mean * (1.0 + amp * (2.0 * PI * (hour as f64 + phase_hours) / 24.0).sin())
}

/// Local solar hour offset for a longitude.
fn local_offset(lon: f64) -> f64 {
    lon / 15.0
}

pub fn demand_series(hours: usize) -> Vec<f64> {
    (0..hours)
        .map(|h| diurnal(MEAN_HOURLY_DEMAND, DEMAND_SWING, h, -6.0))
        .collect()
}

fn compute_per_unit(classes: &[TaskClass]) -> f64 {
    CLASS_MIX
        .iter()
        .map(|(id, share)| {
            share
                * classes
                    .iter()
                    .find(|c| c.id == *id)
                    .map_or(0.0, |c| c.compute_demand)
        })
        .sum()
}

fn egress_price(from: &Region, to: &Region) -> f64 {
    if from.continent == to.continent {
        EGRESS_SAME_CONTINENT
    } else if matches!(from.continent, Continent::NorthAmerica | Continent::Europe) {
        EGRESS_FROM_NA_EU
    } else {
        EGRESS_FROM_OTHER
    }
}

pub fn default_scenario() -> ScenarioConfig {
    scenario_with_horizon(DEFAULT_HORIZON_HOURS)
}

pub fn scenario_with_horizon(hours: usize) -> ScenarioConfig {
    let classes = default_classes();
    let mean_compute = MEAN_HOURLY_DEMAND * compute_per_unit(&classes);

    let nodes = REGIONS
        .iter()
        .map(|r| {
            let offset = local_offset(r.lon);
            ComputeNode {
                id: r.id.into(),
                display_name: r.name.into(),
                latitude: r.lat,
                longitude: r.lon,
                // Peaks mid-afternoon local time.
                price_series: (0..hours)
                    .map(|h| diurnal(r.price, PRICE_SWING, h, offset - 9.0))
                    .collect(),
                // Solar pushes the carbon trough to local noon.
                moer_series: (0..hours)
                    .map(|h| diurnal(r.moer, r.moer_amp, h, offset))
                    .collect(),
                pue_series: vec![r.pue; hours],
                capacity_series: vec![r.capacity_share * mean_compute; hours],
            }
        })
        .collect();

    let service_nodes = REGIONS
        .iter()
        .map(|r| ServiceNode {
            id: r.id.into(),
            colocated_compute: r.id.into(),
            client_latency_ms: CLIENT_LATENCY_MS,
            demand_weight: r.demand_weight,
        })
        .collect();

    let mut rtt_matrix = PairMatrix::new();
    for &(a, b, ms) in RTT_MS {
        rtt_matrix.entry(a.into()).or_default().insert(b.into(), ms);
        rtt_matrix.entry(b.into()).or_default().insert(a.into(), ms);
    }

    let mut egress_price_matrix = PairMatrix::new();
    for from in &REGIONS {
        for to in REGIONS.iter().filter(|t| t.id != from.id) {
            egress_price_matrix
                .entry(from.id.into())
                .or_default()
                .insert(to.id.into(), egress_price(from, to));
        }
    }

    ScenarioConfig {
        id: DEFAULT_SCENARIO_ID.into(),
        synthetic: true,
        horizon_hours: hours,
        nodes,
        service_nodes,
        classes,
        class_mix: CLASS_MIX.into_iter().collect::<BTreeMap<_, _>>(),
        demand_series: demand_series(hours),
        rtt_matrix,
        egress_price_matrix,
        wan_inflation: 1.4,
        fallback_speed_km_per_ms: 200.0,
        fallback_overhead_ms: 20.0,
        intra_region_floor_ms: Some(1.0),
        round_mode: Default::default(),
        latency_multiplier: 1.0,
        weights: PolicyWeights::default(),
        delay_penalty_mode: Default::default(),
        legal_mask: Default::default(),
        system_mask: Default::default(),
        tier_thresholds: Default::default(),
        statefulness_factors: Default::default(),
        local_default: Default::default(),
    }
}
