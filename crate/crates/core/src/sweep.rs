//! Latency sweep, per-class tier analysis and the ablation grid.
//!
//! Every cell is an independent horizon run. Cells run in parallel on the
//! ambient rayon pool and are collected in input order, so the output does
//! not depend on the thread count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocator::{run_horizon, Trace};
use crate::error::{Error, Result};
use crate::metrics::{report, totals, MetricsReport, TierShares, Totals};
use crate::model::Model;
use crate::policy::{Policy, PolicyKind};
use crate::scenario::{ClassId, FrictionParams, ScenarioConfig};

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $s),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                let norm = s.replace('-', "_");
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str() == norm)
                    .ok_or_else(|| format!(
                        "unknown {} `{s}` (expected one of {})",
                        stringify!($name),
                        $name::ALL.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(", "),
                    ))
            }
        }
    };
}

named_enum!(
    /// Migration friction preset applied to every class.
    FrictionCase {
        Baseline => "baseline",
        Off => "off",
        EgressOnly => "egress_only",
        StateCacheEgress => "state_cache_egress",
        High => "high",
    }
);

named_enum!(
    CapacityRegime {
        Loose => "loose",
        Baseline => "baseline",
        Tight => "tight",
    }
);

named_enum!(
    MixPreset {
        InteractiveHeavy => "interactive_heavy",
        Balanced => "balanced",
        BatchHeavy => "batch_heavy",
    }
);

fn default_multipliers() -> Vec<f64> {
    vec![0.5, 0.75, 1.0, 1.5, 2.5]
}
fn default_policies() -> Vec<PolicyKind> {
    PolicyKind::ALL.to_vec()
}
fn default_friction_cases() -> Vec<FrictionCase> {
    vec![
        FrictionCase::Off,
        FrictionCase::EgressOnly,
        FrictionCase::StateCacheEgress,
        FrictionCase::High,
    ]
}
fn default_capacity_regimes() -> Vec<CapacityRegime> {
    CapacityRegime::ALL.to_vec()
}
fn default_mix_presets() -> Vec<MixPreset> {
    MixPreset::ALL.to_vec()
}
fn default_ablation_multiplier() -> f64 {
    1.5
}
fn default_high_friction_factor() -> f64 {
    3.0
}
fn default_loose_factor() -> f64 {
    2.0
}
fn default_tight_factor() -> f64 {
    0.6
}
fn default_mix_shift() -> f64 {
    0.15
}
fn default_top_flows() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_multipliers")]
    pub multipliers: Vec<f64>,
    #[serde(default = "default_policies")]
    pub policies: Vec<PolicyKind>,
    #[serde(default = "default_friction_cases")]
    pub friction_cases: Vec<FrictionCase>,
    #[serde(default = "default_capacity_regimes")]
    pub capacity_regimes: Vec<CapacityRegime>,
    #[serde(default = "default_mix_presets")]
    pub mix_presets: Vec<MixPreset>,
    /// Multiplier at which the ablation grid is evaluated.
    #[serde(default = "default_ablation_multiplier")]
    pub ablation_multiplier: f64,
    #[serde(default = "default_high_friction_factor")]
    pub high_friction_factor: f64,
    #[serde(default = "default_loose_factor")]
    pub loose_capacity_factor: f64,
    #[serde(default = "default_tight_factor")]
    pub tight_capacity_factor: f64,
    /// Class-mix mass moved between A and D by the skewed presets.
    #[serde(default = "default_mix_shift")]
    pub mix_shift: f64,
    #[serde(default = "default_top_flows")]
    pub top_flows: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            multipliers: default_multipliers(),
            policies: default_policies(),
            friction_cases: default_friction_cases(),
            capacity_regimes: default_capacity_regimes(),
            mix_presets: default_mix_presets(),
            ablation_multiplier: default_ablation_multiplier(),
            high_friction_factor: default_high_friction_factor(),
            loose_capacity_factor: default_loose_factor(),
            tight_capacity_factor: default_tight_factor(),
            mix_shift: default_mix_shift(),
            top_flows: default_top_flows(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.into()));
        if self.multipliers.is_empty() {
            return bad("multipliers is empty");
        }
        if self.policies.is_empty() {
            return bad("policies is empty");
        }
        if self.friction_cases.is_empty() {
            return bad("friction_cases is empty");
        }
        if self.capacity_regimes.is_empty() {
            return bad("capacity_regimes is empty");
        }
        if self.mix_presets.is_empty() {
            return bad("mix_presets is empty");
        }
        if self
            .multipliers
            .iter()
            .any(|m| !(m.is_finite() && *m > 0.0))
        {
            return bad("multipliers must be positive and finite");
        }
        for w in self.multipliers.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::UnorderedMultipliers(w[1], w[0]));
            }
        }
        if !(self.ablation_multiplier.is_finite() && self.ablation_multiplier > 0.0) {
            return bad("ablation_multiplier must be positive and finite");
        }
        if !(self.high_friction_factor.is_finite() && self.high_friction_factor >= 0.0) {
            return bad("high_friction_factor must be non-negative");
        }
        for (name, f) in [
            ("loose_capacity_factor", self.loose_capacity_factor),
            ("tight_capacity_factor", self.tight_capacity_factor),
        ] {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidSpec(format!("{name} must be positive")));
            }
        }
        if !(self.mix_shift.is_finite() && self.mix_shift >= 0.0) {
            return bad("mix_shift must be non-negative");
        }
        if self.top_flows == 0 {
            return bad("top_flows must be at least 1");
        }
        Ok(())
    }
}

pub fn friction_preset(
    base: &FrictionParams,
    case: FrictionCase,
    high_factor: f64,
) -> FrictionParams {
    match case {
        FrictionCase::Baseline => *base,
        FrictionCase::Off => FrictionParams {
            egress_price_per_gb: base.egress_price_per_gb,
            ..FrictionParams::default()
        },
        FrictionCase::EgressOnly => FrictionParams {
            state_cost_per_unit: 0.0,
            cache_cost_per_unit: 0.0,
            replica_cost_per_unit: 0.0,
            ..*base
        },
        FrictionCase::StateCacheEgress => FrictionParams {
            replica_cost_per_unit: 0.0,
            ..*base
        },
        FrictionCase::High => base.scaled(high_factor),
    }
}

pub fn apply_friction(
    cfg: &ScenarioConfig,
    case: FrictionCase,
    high_factor: f64,
) -> ScenarioConfig {
    let mut out = cfg.clone();
    for c in &mut out.classes {
        c.friction = friction_preset(&c.friction, case, high_factor);
    }
    out
}

pub fn scale_capacity(cfg: &ScenarioConfig, factor: f64) -> ScenarioConfig {
    let mut out = cfg.clone();
    for n in &mut out.nodes {
        for c in &mut n.capacity_series {
            *c *= factor;
        }
    }
    out
}

pub fn apply_capacity(
    cfg: &ScenarioConfig,
    regime: CapacityRegime,
    spec: &SweepSpec,
) -> ScenarioConfig {
    match regime {
        CapacityRegime::Loose => scale_capacity(cfg, spec.loose_capacity_factor),
        CapacityRegime::Baseline => cfg.clone(),
        CapacityRegime::Tight => scale_capacity(cfg, spec.tight_capacity_factor),
    }
}

/// Shifts up to `shift` of the class mix between A and D. Capacity is
/// rescaled by the change in total compute demand, so the regime keeps the
/// same headroom relative to what is asked of it.
pub fn apply_mix(cfg: &ScenarioConfig, preset: MixPreset, shift: f64) -> ScenarioConfig {
    let (from, to) = match preset {
        MixPreset::Balanced => return cfg.clone(),
        MixPreset::InteractiveHeavy => (ClassId::D, ClassId::A),
        MixPreset::BatchHeavy => (ClassId::A, ClassId::D),
    };
    let mut out = cfg.clone();
    let available = out.class_mix.get(&from).copied().unwrap_or(0.0);
    let moved = shift.min(available).max(0.0);
    if moved == 0.0 || !out.class_mix.contains_key(&to) {
        return out;
    }
    *out.class_mix.get_mut(&from).unwrap() -= moved;
    *out.class_mix.get_mut(&to).unwrap() += moved;

    let before = compute_per_unit(cfg);
    let after = compute_per_unit(&out);
    if before > 0.0 && after > 0.0 {
        out = scale_capacity(&out, after / before);
    }
    out
}

fn compute_per_unit(cfg: &ScenarioConfig) -> f64 {
    cfg.classes
        .iter()
        .map(|c| cfg.class_mix.get(&c.id).copied().unwrap_or(0.0) * c.compute_demand)
        .sum()
}

/// Scenario for one ablation cell.
pub fn ablation_scenario(
    cfg: &ScenarioConfig,
    friction: FrictionCase,
    capacity: CapacityRegime,
    mix: MixPreset,
    spec: &SweepSpec,
) -> ScenarioConfig {
    let out = apply_friction(cfg, friction, spec.high_friction_factor);
    let out = apply_mix(&out, mix, spec.mix_shift);
    apply_capacity(&out, capacity, spec).with_multiplier(spec.ablation_multiplier)
}

/// One horizon run of `policy` at the scenario's own multiplier.
pub fn run(cfg: &ScenarioConfig, kind: PolicyKind) -> Result<Trace> {
    let model = Model::new(cfg);
    run_horizon(&model, &Policy::from_scenario(kind, cfg))
}

/// Runs `kind` plus the local-only baseline and builds the report.
pub fn run_with_report(
    cfg: &ScenarioConfig,
    kind: PolicyKind,
    top_n: usize,
) -> Result<(Trace, MetricsReport)> {
    let model = Model::new(cfg);
    let baseline = baseline_totals(cfg)?;
    let trace = run_horizon(&model, &Policy::from_scenario(kind, cfg))?;
    let r = report(&model, &trace, Some(&baseline), top_n)?;
    Ok((trace, r))
}

fn baseline_totals(cfg: &ScenarioConfig) -> Result<Totals> {
    Ok(totals(&run(cfg, PolicyKind::LocalOnly)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierRow {
    pub multiplier: f64,
    pub policy: PolicyKind,
    pub report: MetricsReport,
}

/// Stage 1: every (multiplier, policy) cell, reductions against local-only
/// at the same multiplier. Rows are ordered by multiplier, then by the
/// sweep's policy order.
pub fn latency_sweep(cfg: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<FrontierRow>> {
    spec.validate()?;
    let scenarios: Vec<ScenarioConfig> = spec
        .multipliers
        .iter()
        .map(|&m| cfg.with_multiplier(m))
        .collect();
    let baselines: Vec<Totals> = scenarios
        .par_iter()
        .map(baseline_totals)
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, PolicyKind)> = (0..scenarios.len())
        .flat_map(|k| spec.policies.iter().map(move |&p| (k, p)))
        .collect();
    cells
        .par_iter()
        .map(|&(k, policy)| {
            let sc = &scenarios[k];
            let model = Model::new(sc);
            let trace = run_horizon(&model, &Policy::from_scenario(policy, sc))?;
            Ok(FrontierRow {
                multiplier: spec.multipliers[k],
                policy,
                report: report(&model, &trace, Some(&baselines[k]), spec.top_flows)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    pub policy: PolicyKind,
    pub class: ClassId,
    pub shares: TierShares,
}

/// Stage 2: tier shares per class and policy at a fixed multiplier.
pub fn class_analysis(
    cfg: &ScenarioConfig,
    multiplier: f64,
    policies: &[PolicyKind],
) -> Result<Vec<ClassRow>> {
    if !(multiplier.is_finite() && multiplier > 0.0) {
        return Err(Error::InvalidSpec(
            "latency multiplier must be positive".into(),
        ));
    }
    let sc = cfg.with_multiplier(multiplier);
    let per_policy: Vec<BTreeMap<ClassId, TierShares>> = policies
        .par_iter()
        .map(|&p| {
            let trace = run(&sc, p)?;
            Ok(crate::metrics::tier_shares(&trace, &sc.tier_thresholds))
        })
        .collect::<Result<_>>()?;
    Ok(policies
        .iter()
        .zip(per_policy)
        .flat_map(|(&policy, shares)| {
            shares.into_iter().map(move |(class, shares)| ClassRow {
                policy,
                class,
                shares,
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub friction_case: FrictionCase,
    pub capacity_regime: CapacityRegime,
    pub mix_preset: MixPreset,
    pub policy: PolicyKind,
    pub multiplier: f64,
    pub rid: f64,
    pub cost_reduction: f64,
    pub carbon_reduction: f64,
    pub sla_violation_rate: f64,
    pub migration_cost_share: f64,
}

/// Stage 3: friction × capacity × mix grid at the sweep's ablation
/// multiplier, each cell against its own local-only run.
pub fn sensitivity(cfg: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<AblationRow>> {
    spec.validate()?;
    let mut cells = Vec::new();
    for &f in &spec.friction_cases {
        for &c in &spec.capacity_regimes {
            for &m in &spec.mix_presets {
                cells.push((f, c, m));
            }
        }
    }
    let per_cell: Vec<Vec<AblationRow>> = cells
        .par_iter()
        .map(|&(f, c, m)| {
            let sc = ablation_scenario(cfg, f, c, m, spec);
            let model = Model::new(&sc);
            let baseline = baseline_totals(&sc)?;
            spec.policies
                .iter()
                .map(|&policy| {
                    let trace = run_horizon(&model, &Policy::from_scenario(policy, &sc))?;
                    let r = report(&model, &trace, Some(&baseline), spec.top_flows)?;
                    Ok(AblationRow {
                        friction_case: f,
                        capacity_regime: c,
                        mix_preset: m,
                        policy,
                        multiplier: spec.ablation_multiplier,
                        rid: r.rid,
                        cost_reduction: r.cost_reduction_vs_baseline,
                        carbon_reduction: r.carbon_reduction_vs_baseline,
                        sla_violation_rate: r.sla_violation_rate,
                        migration_cost_share: r.migration_cost_share,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> FrictionParams {
        FrictionParams {
            state_cost_per_unit: 0.02,
            cache_cost_per_unit: 0.01,
            egress_gb_per_unit: 0.1,
            egress_price_per_gb: 0.05,
            replica_cost_per_unit: 0.004,
        }
    }

    #[test]
    fn friction_presets_zero_the_right_components() {
        let off = friction_preset(&base(), FrictionCase::Off, 3.0);
        assert_eq!(
            off.state_cost_per_unit
                + off.cache_cost_per_unit
                + off.egress_gb_per_unit
                + off.replica_cost_per_unit,
            0.0
        );

        let eg = friction_preset(&base(), FrictionCase::EgressOnly, 3.0);
        assert_eq!(eg.egress_gb_per_unit, 0.1);
        assert_eq!(eg.state_cost_per_unit, 0.0);
        assert_eq!(eg.replica_cost_per_unit, 0.0);

        let sce = friction_preset(&base(), FrictionCase::StateCacheEgress, 3.0);
        assert_eq!(sce.state_cost_per_unit, 0.02);
        assert_eq!(sce.replica_cost_per_unit, 0.0);

        let high = friction_preset(&base(), FrictionCase::High, 3.0);
        assert!((high.state_cost_per_unit - 0.06).abs() < 1e-15);
        assert!((high.egress_gb_per_unit - 0.3).abs() < 1e-15);
        assert_eq!(high.egress_price_per_gb, 0.05);
    }

    #[test]
    fn spec_rejects_unordered_multipliers() {
        let mut s = SweepSpec::default();
        assert!(s.validate().is_ok());
        s.multipliers = vec![1.0, 1.0];
        assert!(matches!(s.validate(), Err(Error::UnorderedMultipliers(..))));
        s.multipliers = vec![];
        assert!(s.validate().is_err());
    }

    #[test]
    fn preset_names_parse() {
        assert_eq!(
            "egress-only".parse::<FrictionCase>().unwrap(),
            FrictionCase::EgressOnly
        );
        assert_eq!(
            "tight".parse::<CapacityRegime>().unwrap(),
            CapacityRegime::Tight
        );
        assert_eq!(
            "batch_heavy".parse::<MixPreset>().unwrap(),
            MixPreset::BatchHeavy
        );
        assert!("medium".parse::<CapacityRegime>().is_err());
    }
}
