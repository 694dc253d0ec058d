//! Service-to-compute and end-to-end latency.
//!
//! Measured RTTs are halved to a one-way figure before WAN inflation. Pairs
//! without a measurement fall back to `great_circle_km / v_f + overhead`,
//! also inflated. A service node talking to its own region is charged a flat
//! floor instead.

use crate::scenario::{pair_lookup, PairMatrix, RoundMode, ScenarioConfig, ServiceNode, TaskClass};

/// Mean Earth radius.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub latitude: f64,
    pub longitude: f64,
}

impl GeoPoint {
    pub const fn new(latitude: f64, longitude: f64) -> Self {
        Self {
            latitude,
            longitude,
        }
    }
}

/// Haversine distance in kilometres.
pub fn great_circle_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let (lat1, lat2) = (a.latitude.to_radians(), b.latitude.to_radians());
    let d_lat = lat2 - lat1;
    let d_lon = (b.longitude - a.longitude).to_radians();
    let h = (d_lat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (d_lon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyParams {
    pub fallback_speed_km_per_ms: f64,
    pub fallback_overhead_ms: f64,
    pub wan_inflation: f64,
    /// `None` disables the intra-region floor.
    pub intra_region_floor_ms: Option<f64>,
}

impl LatencyParams {
    pub fn from_scenario(cfg: &ScenarioConfig) -> Self {
        Self {
            fallback_speed_km_per_ms: cfg.fallback_speed_km_per_ms,
            fallback_overhead_ms: cfg.fallback_overhead_ms,
            wan_inflation: cfg.wan_inflation,
            intra_region_floor_ms: cfg.intra_region_floor_ms,
        }
    }
}

impl Default for LatencyParams {
    fn default() -> Self {
        Self {
            fallback_speed_km_per_ms: 200.0,
            fallback_overhead_ms: 20.0,
            wan_inflation: 1.0,
            intra_region_floor_ms: Some(1.0),
        }
    }
}

/// An endpoint of a service-to-compute hop: a region id and its coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Region<'a> {
    pub id: &'a str,
    pub location: GeoPoint,
}

/// One-way latency from the region hosting a service node to a compute region.
pub fn service_to_compute_ms(
    service_region: Region<'_>,
    compute_region: Region<'_>,
    rtt: &PairMatrix,
    p: &LatencyParams,
) -> f64 {
    if service_region.id == compute_region.id {
        if let Some(floor) = p.intra_region_floor_ms {
            return floor;
        }
    }
    match pair_lookup(rtt, service_region.id, compute_region.id) {
        Some(rtt_ms) => rtt_ms / 2.0 * p.wan_inflation,
        None => fallback_ms(
            great_circle_km(service_region.location, compute_region.location),
            p,
        ),
    }
}

/// Distance-based estimate used when no RTT is available.
pub fn fallback_ms(distance_km: f64, p: &LatencyParams) -> f64 {
    (distance_km / p.fallback_speed_km_per_ms + p.fallback_overhead_ms) * p.wan_inflation
}

/// `L = L_cs + rounds * L_sc + L_q + L_inf`. In round-trip mode every round is
/// charged twice.
pub fn end_to_end_ms(
    class: &TaskClass,
    client_latency_ms: f64,
    service_to_compute: f64,
    mode: RoundMode,
) -> f64 {
    let hops = match mode {
        RoundMode::OneWay => f64::from(class.rounds),
        RoundMode::RoundTrip => 2.0 * f64::from(class.rounds),
    };
    client_latency_ms + hops * service_to_compute + class.queueing_time_ms + class.inference_time_ms
}

/// Convenience lookup by ids on a scenario. Unknown ids yield `NaN`.
pub fn service_to_compute_ms_for(cfg: &ScenarioConfig, s: &ServiceNode, compute_id: &str) -> f64 {
    let (Some(from), Some(to)) = (
        cfg.nodes.iter().find(|n| n.id == s.colocated_compute),
        cfg.nodes.iter().find(|n| n.id == compute_id),
    ) else {
        return f64::NAN;
    };
    service_to_compute_ms(
        Region {
            id: &from.id,
            location: GeoPoint::new(from.latitude, from.longitude),
        },
        Region {
            id: &to.id,
            location: GeoPoint::new(to.latitude, to.longitude),
        },
        &cfg.rtt_matrix,
        &LatencyParams::from_scenario(cfg),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{ClassId, FrictionParams, Statefulness};

    const VIRGINIA: GeoPoint = GeoPoint::new(38.95, -77.45);
    const OREGON: GeoPoint = GeoPoint::new(45.60, -121.18);

    /// Spherical law of cosines, an algebraically independent route to the
    /// same distance.
    fn cosine_law_km(a: GeoPoint, b: GeoPoint) -> f64 {
        let (p1, p2) = (a.latitude.to_radians(), b.latitude.to_radians());
        let dl = (b.longitude - a.longitude).to_radians();
        let c = (p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos()).clamp(-1.0, 1.0);
        EARTH_RADIUS_KM * c.acos()
    }

    fn region(id: &str, location: GeoPoint) -> Region<'_> {
        Region { id, location }
    }

    fn class(rounds: u32) -> TaskClass {
        TaskClass {
            id: ClassId::A,
            latency_budget_ms: 200.0,
            energy_per_unit_kwh: 1.0,
            compute_demand: 1.0,
            rounds,
            inference_time_ms: 50.0,
            queueing_time_ms: 0.0,
            statefulness: Statefulness::High,
            friction: FrictionParams::default(),
        }
    }

    #[test]
    fn zero_distance_for_identical_points() {
        assert_eq!(great_circle_km(VIRGINIA, VIRGINIA), 0.0);
    }

    #[test]
    fn half_circumference_for_antipodal_longitudes() {
        let d = great_circle_km(GeoPoint::new(0.0, 0.0), GeoPoint::new(0.0, 180.0));
        assert!((d - 20_015.0).abs() < 10.0, "{d}");
    }

    #[test]
    fn virginia_oregon_matches_cosine_law() {
        // Frozen from the cosine-law oracle: 3 626.34 km.
        let d = great_circle_km(VIRGINIA, OREGON);
        assert!((d - cosine_law_km(VIRGINIA, OREGON)).abs() < 1e-6);
        assert!((d - 3626.34).abs() < 0.01, "{d}");
    }

    #[test]
    fn colocated_pair_uses_floor() {
        let p = LatencyParams::default();
        let mut rtt = PairMatrix::new();
        rtt.entry("x".into()).or_default().insert("x".into(), 40.0);
        let ms = service_to_compute_ms(region("x", VIRGINIA), region("x", VIRGINIA), &rtt, &p);
        assert_eq!(ms, 1.0);
    }

    #[test]
    fn fallback_for_4000_km_is_40_ms() {
        let p = LatencyParams::default();
        assert_eq!(fallback_ms(4000.0, &p), 40.0);
    }

    #[test]
    fn measured_rtt_is_halved_then_inflated() {
        let p = LatencyParams {
            wan_inflation: 1.4,
            ..LatencyParams::default()
        };
        let mut rtt = PairMatrix::new();
        rtt.entry("a".into()).or_default().insert("b".into(), 140.0);
        let ms = service_to_compute_ms(region("a", VIRGINIA), region("b", OREGON), &rtt, &p);
        assert!((ms - 98.0).abs() < 1e-12);
        // Ordered lookup: the reverse direction is not measured.
        let back = service_to_compute_ms(region("b", OREGON), region("a", VIRGINIA), &rtt, &p);
        let expected = fallback_ms(great_circle_km(OREGON, VIRGINIA), &p);
        assert_eq!(back, expected);
    }

    #[test]
    fn end_to_end_sums_terms() {
        assert_eq!(end_to_end_ms(&class(1), 10.0, 1.0, RoundMode::OneWay), 61.0);
        assert_eq!(end_to_end_ms(&class(5), 10.0, 1.0, RoundMode::OneWay), 65.0);
        assert_eq!(
            end_to_end_ms(&class(5), 10.0, 1.0, RoundMode::RoundTrip),
            70.0
        );
    }

    #[test]
    fn fallback_vanishes_with_distance_when_overhead_is_zero() {
        let p = LatencyParams {
            fallback_overhead_ms: 0.0,
            intra_region_floor_ms: None,
            ..LatencyParams::default()
        };
        let rtt = PairMatrix::new();
        let here = region("x", VIRGINIA);
        assert_eq!(service_to_compute_ms(here, here, &rtt, &p), 0.0);
        let near = region("y", GeoPoint::new(38.95 + 1e-6, -77.45));
        assert!(service_to_compute_ms(here, near, &rtt, &p) < 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point() -> impl Strategy<Value = GeoPoint> {
            (-90.0f64..=90.0, -180.0f64..=180.0).prop_map(|(a, b)| GeoPoint::new(a, b))
        }

        proptest! {
            #[test]
            fn distance_is_symmetric(a in point(), b in point()) {
                let ab = great_circle_km(a, b);
                prop_assert!(ab >= 0.0);
                prop_assert!((ab - great_circle_km(b, a)).abs() < 1e-6);
            }

            #[test]
            fn end_to_end_monotone_in_rounds_and_hop(
                rounds in 1u32..10, lsc in 0.0f64..500.0, extra in 0.001f64..100.0,
            ) {
                let c = class(rounds);
                let base = end_to_end_ms(&c, 10.0, lsc, RoundMode::OneWay);
                prop_assert!(end_to_end_ms(&class(rounds + 1), 10.0, lsc, RoundMode::OneWay) >= base);
                prop_assert!(end_to_end_ms(&c, 10.0, lsc + extra, RoundMode::OneWay) > base);
            }

            #[test]
            fn inflation_never_reduces_latency(d in 0.0f64..20_000.0, k in 1.0f64..3.0) {
                let low = LatencyParams::default();
                let high = LatencyParams { wan_inflation: k, ..low };
                prop_assert!(fallback_ms(d, &high) >= fallback_ms(d, &low));
            }
        }
    }
}
