//! Scenario loading and result emission.
//!
//! Result tables are long-format: one row per metric value, every value
//! tagged with its units. Numbers are rendered with six significant digits
//! so output files are stable across platforms and diff cleanly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::{erl_crl, Flow, SweepPoint};
use crate::policy::PolicyKind;
use crate::scenario::ScenarioConfig;
use crate::sweep::{AblationRow, ClassRow, FrontierRow, SweepSpec};
use crate::validate::validate_scenario;

pub const RESULT_COLUMNS: [&str; 10] = [
    "scenario_id",
    "policy",
    "multiplier",
    "friction_case",
    "capacity_regime",
    "mix_preset",
    "class",
    "metric",
    "value",
    "units",
];

pub const FLOW_COLUMNS: [&str; 8] = [
    "scenario_id",
    "policy",
    "multiplier",
    "rank",
    "source",
    "destination",
    "share",
    "mean_net_benefit",
];

pub const ALL_CLASSES: &str = "all";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })
}

// serde_json appends " at line X column Y"; the error type carries those.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(k) => msg[..k].to_string(),
        None => msg.to_string(),
    }
}

/// Parses a scenario without validating it.
pub fn parse_scenario(text: &str, path: &Path) -> Result<ScenarioConfig> {
    parse_json(text, path)
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let cfg = parse_scenario(&read(path)?, path)?;
    let findings = validate_scenario(&cfg);
    if findings.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Invalid(findings))
    }
}

/// Reads and parses a scenario without validating it.
pub fn load_unvalidated(path: &Path) -> Result<ScenarioConfig> {
    parse_scenario(&read(path)?, path)
}

pub fn load_sweep_spec(path: &Path) -> Result<SweepSpec> {
    let spec: SweepSpec = parse_json(&read(path)?, path)?;
    spec.validate()?;
    Ok(spec)
}

pub fn scenario_to_json(cfg: &ScenarioConfig) -> String {
    let mut s = serde_json::to_string_pretty(cfg).expect("scenario serializes");
    s.push('\n');
    s
}

/// SHA-256 of the scenario's canonical compact JSON.
pub fn scenario_sha256(cfg: &ScenarioConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("scenario serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Renders `v` with six significant digits, dropping trailing zeros.
pub fn sig6(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..16).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let rounded: f64 = sci.parse().expect("round trip");
    let decimals = (5 - exp).max(0) as usize;
    let fixed = format!("{rounded:.decimals$}");
    trim_zeros(&fixed).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One metric value in a long-format result table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario_id: String,
    pub policy: String,
    pub multiplier: f64,
    pub friction_case: String,
    pub capacity_regime: String,
    pub mix_preset: String,
    pub class: String,
    pub metric: String,
    pub value: f64,
    pub units: String,
}

impl ResultRow {
    fn cells(&self) -> [String; 10] {
        [
            self.scenario_id.clone(),
            self.policy.clone(),
            sig6(self.multiplier),
            self.friction_case.clone(),
            self.capacity_regime.clone(),
            self.mix_preset.clone(),
            self.class.clone(),
            self.metric.clone(),
            sig6(self.value),
            self.units.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowRow {
    pub scenario_id: String,
    pub policy: String,
    pub multiplier: f64,
    pub rank: usize,
    pub source: String,
    pub destination: String,
    pub share: f64,
    pub mean_net_benefit: f64,
}

impl FlowRow {
    fn cells(&self) -> [String; 8] {
        [
            self.scenario_id.clone(),
            self.policy.clone(),
            sig6(self.multiplier),
            self.rank.to_string(),
            self.source.clone(),
            self.destination.clone(),
            sig6(self.share),
            sig6(self.mean_net_benefit),
        ]
    }
}

/// Labels for the scenario variant a row belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub friction_case: String,
    pub capacity_regime: String,
    pub mix_preset: String,
}

impl Default for Variant {
    fn default() -> Self {
        Self {
            friction_case: "baseline".into(),
            capacity_regime: "baseline".into(),
            mix_preset: "balanced".into(),
        }
    }
}

struct RowBuilder<'a> {
    scenario_id: &'a str,
    variant: &'a Variant,
    policy: PolicyKind,
    multiplier: f64,
    class: String,
}

impl RowBuilder<'_> {
    fn row(&self, metric: &str, value: f64, units: &str) -> ResultRow {
        ResultRow {
            scenario_id: self.scenario_id.into(),
            policy: self.policy.as_str().into(),
            multiplier: self.multiplier,
            friction_case: self.variant.friction_case.clone(),
            capacity_regime: self.variant.capacity_regime.clone(),
            mix_preset: self.variant.mix_preset.clone(),
            class: self.class.clone(),
            metric: metric.into(),
            value,
            units: units.into(),
        }
    }
}

/// Frontier table rows, plus `erl`/`crl` rows at the upper end of each
/// sweep step.
pub fn frontier_rows(
    scenario_id: &str,
    variant: &Variant,
    rows: &[FrontierRow],
) -> Result<Vec<ResultRow>> {
    let mut out = Vec::new();
    for r in rows {
        let b = RowBuilder {
            scenario_id,
            variant,
            policy: r.policy,
            multiplier: r.multiplier,
            class: ALL_CLASSES.into(),
        };
        let m = &r.report;
        out.extend([
            b.row("rid", m.rid, "fraction"),
            b.row("cost_reduction", m.cost_reduction_vs_baseline, "fraction"),
            b.row(
                "carbon_reduction",
                m.carbon_reduction_vs_baseline,
                "fraction",
            ),
            b.row("total_cost", m.total_cost_usd, "usd"),
            b.row("total_carbon", m.total_carbon_g, "gco2eq"),
            b.row("migration_cost", m.total_migration_cost_usd, "usd"),
            b.row("migration_cost_share", m.migration_cost_share, "fraction"),
            b.row("sla_violation_rate", m.sla_violation_rate, "fraction"),
            b.row(
                "mean_service_to_compute_latency",
                m.mean_service_to_compute_ms,
                "ms",
            ),
            b.row("overflow", m.overflow_compute_units, "compute_units"),
        ]);
    }

    let mut policies: Vec<PolicyKind> = rows.iter().map(|r| r.policy).collect();
    policies.sort();
    policies.dedup();
    for policy in policies {
        let points: Vec<SweepPoint> = rows
            .iter()
            .filter(|r| r.policy == policy)
            .map(|r| SweepPoint {
                multiplier: r.multiplier,
                cost: r.report.total_cost_usd,
                carbon: r.report.total_carbon_g,
            })
            .collect();
        if points.len() < 2 {
            continue;
        }
        for step in erl_crl(&points)? {
            let b = RowBuilder {
                scenario_id,
                variant,
                policy,
                multiplier: step.to,
                class: ALL_CLASSES.into(),
            };
            out.push(b.row("erl", step.erl, "usd_per_unit_multiplier"));
            out.push(b.row("crl", step.crl, "gco2eq_per_unit_multiplier"));
        }
    }
    Ok(out)
}

pub fn tier_rows(
    scenario_id: &str,
    variant: &Variant,
    multiplier: f64,
    rows: &[ClassRow],
) -> Vec<ResultRow> {
    let mut out = Vec::new();
    for r in rows {
        let b = RowBuilder {
            scenario_id,
            variant,
            policy: r.policy,
            multiplier,
            class: r.class.as_str().into(),
        };
        out.extend([
            b.row("share_local", r.shares.local, "fraction"),
            b.row("share_regional", r.shares.regional, "fraction"),
            b.row(
                "share_energy_oriented",
                r.shares.energy_oriented,
                "fraction",
            ),
        ]);
    }
    out
}

pub fn ablation_rows(scenario_id: &str, rows: &[AblationRow]) -> Vec<ResultRow> {
    let mut out = Vec::new();
    for r in rows {
        let variant = Variant {
            friction_case: r.friction_case.as_str().into(),
            capacity_regime: r.capacity_regime.as_str().into(),
            mix_preset: r.mix_preset.as_str().into(),
        };
        let b = RowBuilder {
            scenario_id,
            variant: &variant,
            policy: r.policy,
            multiplier: r.multiplier,
            class: ALL_CLASSES.into(),
        };
        out.extend([
            b.row("rid", r.rid, "fraction"),
            b.row("cost_reduction", r.cost_reduction, "fraction"),
            b.row("carbon_reduction", r.carbon_reduction, "fraction"),
            b.row("sla_violation_rate", r.sla_violation_rate, "fraction"),
            b.row("migration_cost_share", r.migration_cost_share, "fraction"),
        ]);
    }
    out
}

pub fn flow_rows(
    scenario_id: &str,
    policy: PolicyKind,
    multiplier: f64,
    flows: &[Flow],
) -> Vec<FlowRow> {
    flows
        .iter()
        .enumerate()
        .map(|(k, f)| FlowRow {
            scenario_id: scenario_id.into(),
            policy: policy.as_str().into(),
            multiplier,
            rank: k + 1,
            source: f.source.clone(),
            destination: f.destination.clone(),
            share: f.share,
            mean_net_benefit: f.mean_net_benefit,
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tables {
    pub frontier: Vec<ResultRow>,
    pub tiers: Vec<ResultRow>,
    pub ablation: Vec<ResultRow>,
    pub flows: Vec<FlowRow>,
}

/// Provenance written next to the tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub scenario_id: String,
    pub scenario_sha256: String,
    pub synthetic: bool,
    pub settings: serde_json::Value,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, cfg: &ScenarioConfig, settings: serde_json::Value) -> Self {
        Self {
            tool: "geoplace".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            scenario_id: cfg.id.clone(),
            scenario_sha256: scenario_sha256(cfg),
            synthetic: cfg.synthetic,
            settings,
            files: Vec::new(),
        }
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn csv_bytes<const N: usize>(
    header: [&str; N],
    rows: impl Iterator<Item = [String; N]>,
) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Output {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    };
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::Output {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    })
}

// JSON output carries the same rounded values as the CSV.
fn json_result_rows(rows: &[ResultRow]) -> serde_json::Value {
    serde_json::Value::Array(
        rows.iter()
            .map(|r| {
                let cells = r.cells();
                let mut obj = serde_json::Map::new();
                for (k, v) in RESULT_COLUMNS.iter().zip(cells) {
                    obj.insert((*k).into(), json_cell(k, v));
                }
                serde_json::Value::Object(obj)
            })
            .collect(),
    )
}

fn json_flow_rows(rows: &[FlowRow]) -> serde_json::Value {
    serde_json::Value::Array(
        rows.iter()
            .map(|r| {
                let cells = r.cells();
                let mut obj = serde_json::Map::new();
                for (k, v) in FLOW_COLUMNS.iter().zip(cells) {
                    obj.insert((*k).into(), json_cell(k, v));
                }
                serde_json::Value::Object(obj)
            })
            .collect(),
    )
}

fn json_cell(column: &str, cell: String) -> serde_json::Value {
    match column {
        "multiplier" | "value" | "share" | "mean_net_benefit" | "rank" => cell
            .parse::<f64>()
            .ok()
            .and_then(|v| serde_json::Number::from_f64(v).map(serde_json::Value::Number))
            .unwrap_or(serde_json::Value::String(cell)),
        _ => serde_json::Value::String(cell),
    }
}

/// Renders every table in memory. Nothing touches the disk here, so a
/// failure leaves the output directory untouched.
pub fn render_tables(tables: &Tables, format: OutputFormat) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    match format {
        OutputFormat::Csv => {
            for (name, rows) in [
                ("frontier.csv", &tables.frontier),
                ("tiers.csv", &tables.tiers),
                ("ablation.csv", &tables.ablation),
            ] {
                files.push((
                    name.into(),
                    csv_bytes(RESULT_COLUMNS, rows.iter().map(ResultRow::cells))?,
                ));
            }
            files.push((
                "flows.csv".into(),
                csv_bytes(FLOW_COLUMNS, tables.flows.iter().map(FlowRow::cells))?,
            ));
        }
        OutputFormat::Json => {
            let pretty = |v: serde_json::Value| {
                let mut b = serde_json::to_vec_pretty(&v).expect("json value serializes");
                b.push(b'\n');
                b
            };
            files.push((
                "frontier.json".into(),
                pretty(json_result_rows(&tables.frontier)),
            ));
            files.push(("tiers.json".into(), pretty(json_result_rows(&tables.tiers))));
            files.push((
                "ablation.json".into(),
                pretty(json_result_rows(&tables.ablation)),
            ));
            files.push(("flows.json".into(), pretty(json_flow_rows(&tables.flows))));
        }
    }
    Ok(files)
}

/// Writes all tables and the manifest into `out_dir`, creating it if needed.
/// Returns the written paths.
pub fn emit_results(
    tables: &Tables,
    out_dir: &Path,
    format: OutputFormat,
    mut manifest: Manifest,
) -> Result<Vec<PathBuf>> {
    let files = render_tables(tables, format)?;
    manifest.files = files.iter().map(|(n, _)| n.clone()).collect();
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    manifest_bytes.push(b'\n');

    fs::create_dir_all(out_dir).map_err(|e| Error::Output {
        path: out_dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut written = Vec::new();
    for (name, bytes) in files
        .iter()
        .map(|(n, b)| (n.as_str(), b.as_slice()))
        .chain(std::iter::once((MANIFEST_FILE, manifest_bytes.as_slice())))
    {
        let path = out_dir.join(name);
        write_file(&path, bytes)?;
        written.push(path);
    }
    Ok(written)
}
