mod common;

use common::*;
use geoplace_core::io::{frontier_rows, Variant};
use geoplace_core::scenario::ClassId;
use geoplace_core::sweep::{
    ablation_scenario, apply_mix, class_analysis, latency_sweep, run_with_report, sensitivity,
    AblationRow,
};
use geoplace_core::{
    default_scenario, CapacityRegime, FrictionCase, MixPreset, PolicyKind, SweepSpec,
};

fn spec(multipliers: &[f64]) -> SweepSpec {
    SweepSpec {
        multipliers: multipliers.to_vec(),
        ..SweepSpec::default()
    }
}

#[test]
fn local_only_rows_are_zero() {
    let rows = latency_sweep(&three_region(), &spec(&[1.0, 2.0])).unwrap();
    assert_eq!(rows.len(), 2 * PolicyKind::ALL.len());
    for r in rows.iter().filter(|r| r.policy == PolicyKind::LocalOnly) {
        assert_eq!(r.report.rid, 0.0);
        assert_eq!(r.report.cost_reduction_vs_baseline, 0.0);
        assert_eq!(r.report.carbon_reduction_vs_baseline, 0.0);
        assert_eq!(r.report.total_migration_cost_usd, 0.0);
    }
}

#[test]
fn rows_follow_multiplier_then_policy_order() {
    let s = SweepSpec {
        policies: vec![PolicyKind::Joint, PolicyKind::LocalOnly],
        ..spec(&[0.5, 1.0, 3.0])
    };
    let rows = latency_sweep(&diurnal_quad(), &s).unwrap();
    let keys: Vec<(f64, PolicyKind)> = rows.iter().map(|r| (r.multiplier, r.policy)).collect();
    assert_eq!(
        keys,
        [
            (0.5, PolicyKind::Joint),
            (0.5, PolicyKind::LocalOnly),
            (1.0, PolicyKind::Joint),
            (1.0, PolicyKind::LocalOnly),
            (3.0, PolicyKind::Joint),
            (3.0, PolicyKind::LocalOnly),
        ]
    );
}

#[test]
fn single_multiplier_sweep_has_no_return_rows() {
    let rows = latency_sweep(&home_and_far(), &spec(&[1.0])).unwrap();
    let table = frontier_rows("mini", &Variant::default(), &rows).unwrap();
    assert!(table.iter().all(|r| r.metric != "erl" && r.metric != "crl"));
    assert_eq!(table.len(), 10 * PolicyKind::ALL.len());
}

#[test]
fn unordered_multipliers_are_rejected() {
    assert!(latency_sweep(&home_and_far(), &spec(&[1.0, 1.0])).is_err());
    assert!(latency_sweep(&home_and_far(), &spec(&[2.0, 1.0])).is_err());
}

#[test]
fn sweep_cell_matches_standalone_run() {
    let cfg = default_scenario();
    let rows = latency_sweep(&cfg, &spec(&[1.0, 1.5])).unwrap();
    let cell = rows
        .iter()
        .find(|r| r.multiplier == 1.5 && r.policy == PolicyKind::Joint)
        .unwrap();
    let (_, standalone) =
        run_with_report(&cfg.with_multiplier(1.5), PolicyKind::Joint, 10).unwrap();
    assert_eq!(cell.report, standalone);
}

#[test]
fn class_analysis_matches_report_tiers() {
    let cfg = three_region();
    let rows = class_analysis(&cfg, 1.0, &[PolicyKind::Joint]).unwrap();
    let (_, r) = run_with_report(&cfg, PolicyKind::Joint, 10).unwrap();
    assert_eq!(rows.len(), r.tier_shares.len());
    for row in rows {
        assert_eq!(row.shares, r.tier_shares[&row.class]);
        assert!((row.shares.sum() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn masks_force_class_a_home() {
    let mut cfg = default_scenario();
    let ids: Vec<String> = cfg.nodes.iter().map(|n| n.id.clone()).collect();
    for id in ids {
        cfg.legal_mask
            .entry(ClassId::A)
            .or_default()
            .insert(id, false);
    }
    // With every node masked for A, nothing is feasible and A stays home.
    let rows = class_analysis(&cfg, 2.5, &[PolicyKind::Joint, PolicyKind::PriceOnly]).unwrap();
    for r in rows.iter().filter(|r| r.class == ClassId::A) {
        assert_eq!(r.shares.local, 1.0, "{:?}", r.policy);
    }
}

#[test]
fn mix_presets_move_mass_between_a_and_d() {
    let cfg = default_scenario();
    let heavy = apply_mix(&cfg, MixPreset::BatchHeavy, 0.15);
    assert!((heavy.class_mix[&ClassId::A] - (cfg.class_mix[&ClassId::A] - 0.15)).abs() < 1e-12);
    assert!((heavy.class_mix[&ClassId::D] - (cfg.class_mix[&ClassId::D] + 0.15)).abs() < 1e-12);
    let total: f64 = heavy.class_mix.values().sum();
    assert!((total - 1.0).abs() < 1e-12);
    // D needs more compute per unit than A, so capacity grows with it.
    assert!(heavy.nodes[0].capacity_series[0] > cfg.nodes[0].capacity_series[0]);
    assert_eq!(apply_mix(&cfg, MixPreset::Balanced, 0.15), cfg);
}

#[test]
fn ablation_cell_matches_standalone_run() {
    let cfg = three_region();
    let s = SweepSpec {
        friction_cases: vec![FrictionCase::High],
        capacity_regimes: vec![CapacityRegime::Tight],
        mix_presets: vec![MixPreset::BatchHeavy],
        policies: vec![PolicyKind::Joint],
        ..SweepSpec::default()
    };
    let rows = sensitivity(&cfg, &s).unwrap();
    assert_eq!(rows.len(), 1);
    let sc = ablation_scenario(
        &cfg,
        FrictionCase::High,
        CapacityRegime::Tight,
        MixPreset::BatchHeavy,
        &s,
    );
    let (_, r) = run_with_report(&sc, PolicyKind::Joint, 10).unwrap();
    assert_eq!(rows[0].rid, r.rid);
    assert_eq!(rows[0].multiplier, s.ablation_multiplier);
}

fn joint_rid(rows: &[AblationRow], f: FrictionCase, c: CapacityRegime, m: MixPreset) -> f64 {
    rows.iter()
        .find(|r| {
            r.friction_case == f
                && r.capacity_regime == c
                && r.mix_preset == m
                && r.policy == PolicyKind::Joint
        })
        .unwrap()
        .rid
}

#[test]
fn batch_heavy_mix_relocates_at_least_as_much_as_interactive_heavy() {
    let s = SweepSpec {
        friction_cases: vec![FrictionCase::Baseline],
        policies: vec![PolicyKind::Joint],
        ..SweepSpec::default()
    };
    let rows = sensitivity(&default_scenario(), &s).unwrap();
    let b = FrictionCase::Baseline;
    for c in CapacityRegime::ALL.iter().copied() {
        let batch = joint_rid(&rows, b, c, MixPreset::BatchHeavy);
        let interactive = joint_rid(&rows, b, c, MixPreset::InteractiveHeavy);
        assert!(
            batch >= interactive,
            "{c}: batch {batch} < interactive {interactive}"
        );
    }
}

#[test]
fn scarce_home_capacity_can_push_demand_off_local() {
    // Tightening capacity is not monotone in RID: once home is full the
    // slice continues down the ranking to remote nodes.
    let cfg = three_region();
    let loose = geoplace_core::sweep::scale_capacity(&cfg, 10.0);
    let tight = geoplace_core::sweep::scale_capacity(&cfg, 0.4);
    let (_, rl) = run_with_report(&loose, PolicyKind::NearestRegion, 10).unwrap();
    let (_, rt) = run_with_report(&tight, PolicyKind::NearestRegion, 10).unwrap();
    assert_eq!(rl.rid, 0.0);
    assert!(rt.rid > 0.0);
}
