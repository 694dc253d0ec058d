use std::collections::HashMap;

use crate::latency::{end_to_end_ms, service_to_compute_ms, GeoPoint, LatencyParams, Region};
use crate::scenario::{ClassId, ComputeNode, ScenarioConfig, ServiceNode, TaskClass};

/// Index-resolved view of a validated scenario with the service-to-compute
/// latency table precomputed.
///
/// Building a model from a scenario that failed validation panics on the
/// first dangling reference.
#[derive(Debug, Clone)]
pub struct Model<'a> {
    pub cfg: &'a ScenarioConfig,
    node_by_id: HashMap<&'a str, usize>,
    service_by_id: HashMap<&'a str, usize>,
    colocated: Vec<usize>,
    /// `[service][node]` one-way latency in ms.
    lsc: Vec<Vec<f64>>,
}

impl<'a> Model<'a> {
    pub fn new(cfg: &'a ScenarioConfig) -> Self {
        let node_by_id: HashMap<&str, usize> = cfg
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect();
        let service_by_id = cfg
            .service_nodes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect();
        let colocated: Vec<usize> = cfg
            .service_nodes
            .iter()
            .map(|s| {
                *node_by_id
                    .get(s.colocated_compute.as_str())
                    .unwrap_or_else(|| panic!("unknown colocated node `{}`", s.colocated_compute))
            })
            .collect();
        let params = LatencyParams::from_scenario(cfg);
        let region = |n: &'a ComputeNode| Region {
            id: &n.id,
            location: GeoPoint::new(n.latitude, n.longitude),
        };
        let lsc = colocated
            .iter()
            .map(|&home| {
                cfg.nodes
                    .iter()
                    .map(|dest| {
                        service_to_compute_ms(
                            region(&cfg.nodes[home]),
                            region(dest),
                            &cfg.rtt_matrix,
                            &params,
                        )
                    })
                    .collect()
            })
            .collect();
        Self {
            cfg,
            node_by_id,
            service_by_id,
            colocated,
            lsc,
        }
    }

    pub fn node_count(&self) -> usize {
        self.cfg.nodes.len()
    }

    pub fn node(&self, i: usize) -> &'a ComputeNode {
        &self.cfg.nodes[i]
    }

    pub fn service(&self, s: usize) -> &'a ServiceNode {
        &self.cfg.service_nodes[s]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_by_id.get(id).copied()
    }

    pub fn service_index(&self, id: &str) -> Option<usize> {
        self.service_by_id.get(id).copied()
    }

    pub fn class(&self, id: ClassId) -> &'a TaskClass {
        self.cfg
            .class(id)
            .unwrap_or_else(|| panic!("class {id} not defined in scenario"))
    }

    /// Compute node hosting service node `s`.
    pub fn colocated(&self, s: usize) -> usize {
        self.colocated[s]
    }

    pub fn service_to_compute_ms(&self, s: usize, i: usize) -> f64 {
        self.lsc[s][i]
    }

    pub fn end_to_end_ms(&self, class: &TaskClass, s: usize, i: usize) -> f64 {
        end_to_end_ms(
            class,
            self.service(s).client_latency_ms,
            self.lsc[s][i],
            self.cfg.round_mode,
        )
    }

    pub fn price(&self, i: usize, hour: usize) -> f64 {
        self.cfg.nodes[i].price_series[hour]
    }

    pub fn moer(&self, i: usize, hour: usize) -> f64 {
        self.cfg.nodes[i].moer_series[hour]
    }

    pub fn pue(&self, i: usize, hour: usize) -> f64 {
        self.cfg.nodes[i].pue_series[hour]
    }

    pub fn capacity(&self, i: usize, hour: usize) -> f64 {
        self.cfg.nodes[i].capacity_series[hour]
    }

    pub fn masks_allow(&self, class: ClassId, i: usize) -> bool {
        crate::validate::masks_allow(self.cfg, class, &self.cfg.nodes[i].id)
    }
}
