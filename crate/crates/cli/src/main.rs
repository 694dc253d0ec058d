use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use geoplace_core::io::{
    self, ablation_rows, emit_results, flow_rows, frontier_rows, tier_rows, Manifest, OutputFormat,
    Tables, Variant,
};
use geoplace_core::oracle::{oracle_check, CapacityMode};
use geoplace_core::sweep::{
    self, class_analysis, latency_sweep, sensitivity, ClassRow, FrontierRow,
};
use geoplace_core::{
    defaults, validate_scenario, Error, Model, PolicyKind, ScenarioConfig, SweepSpec,
};

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_INVALID: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "geoplace",
    version,
    about = "Latency-constrained geographic placement of inference workloads"
)]
struct Cli {
    /// Worker threads for sweep cells. Output does not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print errors to stderr as a JSON object.
    #[arg(long, global = true)]
    json_errors: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one policy over the horizon and write its metrics.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        policy: PolicyKind,
        #[arg(long)]
        latency_multiplier: Option<f64>,
        /// Corridors to report.
        #[arg(long, default_value_t = 10)]
        top_flows: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Sweep latency multipliers across policies.
    Sweep {
        #[command(flatten)]
        input: Input,
        /// Sweep spec JSON; defaults apply to omitted fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Tier shares per class at a fixed multiplier.
    Classes {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        latency_multiplier: f64,
        /// Restrict to these policies (comma separated).
        #[arg(long, value_delimiter = ',')]
        policies: Option<Vec<PolicyKind>>,
        #[command(flatten)]
        output: Output,
    },
    /// Friction, capacity and mix ablation grid.
    Ablate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Compare the greedy allocator against the exact solver on sampled
    /// sub-instances.
    OracleCheck {
        #[command(flatten)]
        input: Input,
        /// Sample hours from the first N hours of the horizon.
        #[arg(long)]
        hours: usize,
        /// Tasks per instance (at most 10).
        #[arg(long)]
        max_tasks: usize,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        /// Give nodes less capacity than the instance demands.
        #[arg(long)]
        binding: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a scenario and list its findings.
    Validate {
        #[command(flatten)]
        input: Input,
    },
    /// Print the bundled default scenario as JSON.
    DefaultScenario {
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Input {
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

/// Failure that carries its own exit status.
#[derive(Debug)]
struct Exit {
    code: u8,
    kind: &'static str,
    message: String,
    findings: Vec<geoplace_core::Finding>,
}

fn classify(err: &anyhow::Error) -> Exit {
    let message = err.to_string();
    let (code, kind, findings) = match err.downcast_ref::<Error>() {
        Some(Error::Parse { .. }) => (EXIT_PARSE, "parse", Vec::new()),
        Some(Error::Invalid(f)) => (EXIT_INVALID, "validation", f.clone()),
        Some(Error::InvalidSpec(_)) | Some(Error::UnorderedMultipliers(..)) => {
            (EXIT_INVALID, "validation", Vec::new())
        }
        Some(Error::Io { .. }) | Some(Error::Output { .. }) => (EXIT_IO, "io", Vec::new()),
        Some(_) => (EXIT_OTHER, "runtime", Vec::new()),
        None if err.downcast_ref::<std::io::Error>().is_some() => (EXIT_IO, "io", Vec::new()),
        None => (EXIT_OTHER, "runtime", Vec::new()),
    };
    Exit {
        code,
        kind,
        message,
        findings,
    }
}

fn report_error(e: &Exit, json_errors: bool) {
    if json_errors {
        let body = json!({
            "error": {
                "kind": e.kind,
                "exit_code": e.code,
                "message": e.message,
                "findings": e.findings,
            }
        });
        eprintln!("{body}");
    } else {
        eprintln!("error: {}", e.message);
        for f in &e.findings {
            eprintln!("  {f}");
        }
    }
}

fn main() -> ExitCode {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if json_errors {
                report_error(
                    &Exit {
                        code: EXIT_USAGE,
                        kind: "usage",
                        message: usage_message(&e.to_string()),
                        findings: Vec::new(),
                    },
                    true,
                );
            } else {
                let _ = e.print();
            }
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let result = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("failed to start worker pool")
            .and_then(|pool| pool.install(|| run(cli.command))),
        None => run(cli.command),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let e = classify(&err);
            report_error(&e, cli.json_errors);
            ExitCode::from(e.code)
        }
    }
}

// clap's rendered error minus the usage and help trailer, on one line.
fn usage_message(rendered: &str) -> String {
    rendered
        .lines()
        .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
        .trim_start_matches("error: ")
        .to_string()
}

fn load_spec(path: Option<&Path>) -> anyhow::Result<SweepSpec> {
    Ok(match path {
        Some(p) => io::load_sweep_spec(p)?,
        None => SweepSpec::default(),
    })
}

fn write(
    cfg: &ScenarioConfig,
    command: &str,
    settings: serde_json::Value,
    tables: &Tables,
    out: &Output,
) -> anyhow::Result<()> {
    let manifest = Manifest::new(command, cfg, settings);
    let written = emit_results(tables, &out.out, out.format, manifest)?;
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn run(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Simulate {
            input,
            policy,
            latency_multiplier,
            top_flows,
            output,
        } => {
            if top_flows == 0 {
                return Err(Error::InvalidSpec("--top-flows must be at least 1".into()).into());
            }
            let mut cfg = io::load_scenario(&input.scenario)?;
            if let Some(m) = latency_multiplier {
                if !(m.is_finite() && m > 0.0) {
                    return Err(
                        Error::InvalidSpec("--latency-multiplier must be positive".into()).into(),
                    );
                }
                cfg = cfg.with_multiplier(m);
            }
            let (_, report) = sweep::run_with_report(&cfg, policy, top_flows)?;
            let m = cfg.latency_multiplier;
            let variant = Variant::default();
            let classes: Vec<ClassRow> = report
                .tier_shares
                .iter()
                .map(|(&class, &shares)| ClassRow {
                    policy,
                    class,
                    shares,
                })
                .collect();
            let tables = Tables {
                tiers: tier_rows(&cfg.id, &variant, m, &classes),
                flows: flow_rows(&cfg.id, policy, m, &report.top_flows),
                frontier: frontier_rows(
                    &cfg.id,
                    &variant,
                    &[FrontierRow {
                        multiplier: m,
                        policy,
                        report: report.clone(),
                    }],
                )?,
                ablation: Vec::new(),
            };
            println!(
                "{} at multiplier {}: rid {} cost_reduction {} carbon_reduction {} violations {}",
                policy,
                io::sig6(m),
                io::sig6(report.rid),
                io::sig6(report.cost_reduction_vs_baseline),
                io::sig6(report.carbon_reduction_vs_baseline),
                io::sig6(report.sla_violation_rate),
            );
            let settings =
                json!({ "policy": policy, "latency_multiplier": m, "top_flows": top_flows });
            write(&cfg, "simulate", settings, &tables, &output)?;
        }
        Command::Sweep {
            input,
            spec,
            output,
        } => {
            let spec = load_spec(spec.as_deref())?;
            spec.validate()?;
            let cfg = io::load_scenario(&input.scenario)?;
            let rows = latency_sweep(&cfg, &spec)?;
            let variant = Variant::default();
            let tables = Tables {
                frontier: frontier_rows(&cfg.id, &variant, &rows)?,
                flows: rows
                    .iter()
                    .flat_map(|r| flow_rows(&cfg.id, r.policy, r.multiplier, &r.report.top_flows))
                    .collect(),
                ..Tables::default()
            };
            println!("swept {} cells", rows.len());
            write(&cfg, "sweep", json!({ "spec": spec }), &tables, &output)?;
        }
        Command::Classes {
            input,
            latency_multiplier,
            policies,
            output,
        } => {
            let cfg = io::load_scenario(&input.scenario)?;
            let policies = policies.unwrap_or_else(|| PolicyKind::ALL.to_vec());
            if policies.is_empty() {
                return Err(Error::InvalidSpec("--policies is empty".into()).into());
            }
            let rows = class_analysis(&cfg, latency_multiplier, &policies)?;
            let tables = Tables {
                tiers: tier_rows(&cfg.id, &Variant::default(), latency_multiplier, &rows),
                ..Tables::default()
            };
            for r in rows.iter().filter(|r| r.policy == PolicyKind::Joint) {
                println!(
                    "joint class {}: local {} regional {} energy_oriented {}",
                    r.class,
                    io::sig6(r.shares.local),
                    io::sig6(r.shares.regional),
                    io::sig6(r.shares.energy_oriented)
                );
            }
            let settings =
                json!({ "latency_multiplier": latency_multiplier, "policies": policies });
            write(&cfg, "classes", settings, &tables, &output)?;
        }
        Command::Ablate {
            input,
            spec,
            output,
        } => {
            let spec = load_spec(spec.as_deref())?;
            spec.validate()?;
            let cfg = io::load_scenario(&input.scenario)?;
            let rows = sensitivity(&cfg, &spec)?;
            let tables = Tables {
                ablation: ablation_rows(&cfg.id, &rows),
                ..Tables::default()
            };
            println!("ran {} ablation cells", rows.len());
            write(&cfg, "ablate", json!({ "spec": spec }), &tables, &output)?;
        }
        Command::OracleCheck {
            input,
            hours,
            max_tasks,
            instances,
            binding,
            seed,
        } => {
            if hours == 0 || max_tasks == 0 || max_tasks > geoplace_core::oracle::MAX_TASKS {
                return Err(Error::InvalidSpec(format!(
                    "--hours must be >= 1 and --max-tasks in 1..={}",
                    geoplace_core::oracle::MAX_TASKS
                ))
                .into());
            }
            let cfg = io::load_scenario(&input.scenario)?;
            let model = Model::new(&cfg);
            let mode = if binding {
                CapacityMode::Binding
            } else {
                CapacityMode::NonBinding
            };
            let summary = oracle_check(
                &model,
                &cfg.weights,
                instances,
                hours,
                max_tasks,
                mode,
                seed,
            )?;
            let body = json!({
                "capacity": if binding { "binding" } else { "non_binding" },
                "seed": seed,
                "agreement_rate": summary.agreement_rate(),
                "summary": summary,
            });
            println!("{}", serde_json::to_string_pretty(&body)?);
        }
        Command::Validate { input } => {
            let cfg = io::load_unvalidated(&input.scenario)?;
            let findings = validate_scenario(&cfg);
            if !findings.is_empty() {
                return Err(Error::Invalid(findings).into());
            }
            println!(
                "{}: ok ({} nodes, {} hours)",
                input.scenario.display(),
                cfg.nodes.len(),
                cfg.horizon_hours
            );
        }
        Command::DefaultScenario { out } => {
            let text = io::scenario_to_json(&defaults::default_scenario());
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| Error::Output {
                    path: path.clone(),
                    message: e.to_string(),
                })?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
        }
    }
    Ok(0)
}
