//! Command-line surface tying ingestion, planning, simulation, and
//! reporting together.
//!
//! Exit codes: 0 success, 1 usage, 2 input error, 3 internal invariant
//! violation.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use frameplan_core::dxf::{self, PairingConfig};
use frameplan_core::ontology::{self, ClassifyConfig, ComponentArray, ConstructionConstants};
use frameplan_core::perception::NoiseModel;
use frameplan_core::scenarios::{self, TeamKind, SCENARIO_IDS};
use frameplan_core::sim::{self, HumanPolicy, PlannerMode, ScenarioConfig};
use frameplan_core::{render, scm};

const SEED_ENV: &str = "FRAMEPLAN_SEED";

#[derive(Parser)]
#[command(
    name = "frameplan",
    version,
    about = "Design-grounded multi-robot assembly planning and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a DXF design into an SCM document, an SVG render, and a report.
    Ingest(IngestArgs),
    /// Run one closed-loop scenario and write metrics plus a trace.
    Simulate(SimulateArgs),
    /// Run a scenario set over many seeds and write aggregate tables.
    Batch(BatchArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// DXF design file.
    #[arg(long)]
    design: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// SCM document produced by ingest.
    #[arg(long)]
    scm: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Built-in scenario id (s1..s7); omit to configure by flags.
    #[arg(long)]
    scenario: Option<String>,
    /// Master seed; defaults to FRAMEPLAN_SEED or 0.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    overrides: ScenarioOverrides,
}

#[derive(Args)]
struct ScenarioOverrides {
    /// Robot team preset.
    #[arg(long, value_enum)]
    team: Option<TeamChoice>,
    /// Human intervention policy.
    #[arg(long, value_enum)]
    policy: Option<PolicyChoice>,
    /// Planner mode.
    #[arg(long, value_enum)]
    planner: Option<PlannerChoice>,
    /// Estimator noise rates as `false_install,false_missing`.
    #[arg(long)]
    noise: Option<String>,
    /// Iteration cap for one run.
    #[arg(long)]
    max_cycles: Option<u32>,
}

#[derive(Args)]
struct BatchArgs {
    /// SCM document produced by ingest.
    #[arg(long)]
    scm: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated scenario ids, or `all`.
    #[arg(long, default_value = "all")]
    scenario: String,
    /// Number of seeds (0..N).
    #[arg(long, default_value_t = 20)]
    seeds: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum TeamChoice {
    Homogeneous,
    Heterogeneous,
    Scalable,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyChoice {
    None,
    Random,
    Adversarial,
    Cooperative,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlannerChoice {
    Hpr,
    Full,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Input(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Internal(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Batch(args) => cmd_batch(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn ensure_out_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn cmd_ingest(args: IngestArgs) -> Result<(), CliError> {
    let bytes = std::fs::read(&args.design)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.design.display())))?;
    let parsed = dxf::parse_design(&bytes).map_err(|e| CliError::Input(e.to_string()))?;
    let stem = args
        .design
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "design".to_string());

    let (array, leftovers, units_per_inch) = if parsed.segments.is_empty() {
        let array = ComponentArray {
            frame_id: stem.clone(),
            wall_name: stem.clone(),
            construction_constants: ConstructionConstants::default(),
            components: Vec::new(),
            rules: Vec::new(),
        };
        (array, 0usize, f64::NAN)
    } else {
        let constants = ConstructionConstants::default();
        let scale = dxf::recover_scale(&parsed.segments, constants.nominal_thickness_in)
            .map_err(|e| CliError::Input(e.to_string()))?;
        let recon = dxf::reconstruct_rectangles(&parsed.segments, scale, PairingConfig::default());
        let config = ClassifyConfig::default();
        let mut components = ontology::classify_components(&recon.rects, &config)
            .map_err(|e| CliError::Input(e.to_string()))?;
        let rules =
            ontology::derive_rules(&mut components).map_err(|e| CliError::Input(e.to_string()))?;
        let array = ComponentArray {
            frame_id: stem.clone(),
            wall_name: stem,
            construction_constants: constants,
            components,
            rules,
        };
        array
            .validate()
            .map_err(|e| CliError::Internal(e.to_string()))?;
        (array, recon.leftovers.len(), scale.units_per_inch)
    };

    ensure_out_dir(&args.out)?;
    write_file(&args.out.join("scm.json"), &scm::serialize_scm(&array))?;
    write_file(&args.out.join("design.svg"), &render::render_design(&array))?;
    let report = serde_json::json!({
        "component_count": array.components.len(),
        "leftover_count": leftovers,
        "rule_count": array.rules.len(),
        "units_per_inch": if units_per_inch.is_nan() { None } else { Some(units_per_inch) },
        "warnings": parsed.warnings,
    });
    write_file(
        &args.out.join("ingest_report.json"),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&report).expect("report serializes")
        ),
    )?;
    println!(
        "ingested {} components ({} leftover segments, {} rules) into {}",
        array.components.len(),
        leftovers,
        array.rules.len(),
        args.out.display()
    );
    Ok(())
}

fn load_scm(path: &Path) -> Result<ComponentArray, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    scm::parse_scm(&text).map_err(|e| CliError::Input(e.to_string()))
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(value) => value
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an integer, got {value:?}"))),
        Err(_) => Ok(0),
    }
}

fn parse_noise(spec: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = spec.split(',').collect();
    let parse = |s: &str| -> Result<f64, CliError> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid noise rate {s:?}")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Usage(format!("noise rate {v} outside [0,1]")));
        }
        Ok(v)
    };
    match parts.as_slice() {
        [fp, fnr] => Ok((parse(fp)?, parse(fnr)?)),
        _ => Err(CliError::Usage(format!(
            "--noise expects `false_install,false_missing`, got {spec:?}"
        ))),
    }
}

fn build_config(
    scenario: Option<&str>,
    seed: u64,
    overrides: &ScenarioOverrides,
) -> Result<ScenarioConfig, CliError> {
    let mut config = match scenario {
        Some(id) => scenarios::builtin(id, seed)
            .ok_or_else(|| CliError::Usage(format!("unknown scenario id {id:?}")))?,
        None => ScenarioConfig {
            scenario_id: "custom".to_string(),
            team: scenarios::team(TeamKind::Homogeneous),
            policy: HumanPolicy::NoIntervention,
            planner_mode: PlannerMode::MinimalChange,
            seed,
            noise: NoiseModel::noiseless(0),
            max_cycles: scenarios::DEFAULT_MAX_CYCLES,
        },
    };
    if let Some(team) = overrides.team {
        config.team = scenarios::team(match team {
            TeamChoice::Homogeneous => TeamKind::Homogeneous,
            TeamChoice::Heterogeneous => TeamKind::Heterogeneous,
            TeamChoice::Scalable => TeamKind::Scalable,
        });
    }
    if let Some(policy) = overrides.policy {
        config.policy = match policy {
            PolicyChoice::None => HumanPolicy::NoIntervention,
            PolicyChoice::Random => scenarios::random_policy(),
            PolicyChoice::Adversarial => HumanPolicy::Adversarial { seed: 0 },
            PolicyChoice::Cooperative => HumanPolicy::Cooperative { seed: 0 },
        };
    }
    if let Some(planner) = overrides.planner {
        config.planner_mode = match planner {
            PlannerChoice::Hpr => PlannerMode::MinimalChange,
            PlannerChoice::Full => PlannerMode::FullReplanning,
        };
    }
    if let Some(noise) = &overrides.noise {
        let (false_install, false_missing) = parse_noise(noise)?;
        config.noise.false_install_rate = false_install;
        config.noise.false_missing_rate = false_missing;
    }
    if let Some(max_cycles) = overrides.max_cycles {
        if max_cycles == 0 {
            return Err(CliError::Usage("--max-cycles must be positive".into()));
        }
        config.max_cycles = max_cycles;
    }
    Ok(config.with_seed(seed))
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let array = load_scm(&args.scm)?;
    let seed = resolve_seed(args.seed)?;
    let config = build_config(args.scenario.as_deref(), seed, &args.overrides)?;
    let (metrics, trace) = sim::run_scenario(&config, &array);

    ensure_out_dir(&args.out)?;
    write_file(&args.out.join("trace.jsonl"), &sim::trace_to_jsonl(&trace))?;
    let metrics_doc = serde_json::json!({
        "scenario": config.scenario_id,
        "seed": seed,
        "config": config,
        "metrics": metrics,
    });
    write_file(
        &args.out.join("metrics.json"),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&metrics_doc).expect("metrics serialize")
        ),
    )?;
    println!(
        "scenario={} seed={} cycles={} time_ms={:.4} edit_distance={:.3} workload_deviation={:.3} completed={}",
        config.scenario_id,
        seed,
        metrics.cycles,
        metrics.mean_planning_time_ms,
        metrics.mean_edit_distance,
        metrics.mean_workload_deviation,
        metrics.completed
    );
    Ok(())
}

fn cmd_batch(args: BatchArgs) -> Result<(), CliError> {
    let array = load_scm(&args.scm)?;
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be positive".into()));
    }
    let ids: Vec<String> = if args.scenario == "all" {
        SCENARIO_IDS.iter().map(|s| s.to_string()).collect()
    } else {
        args.scenario
            .split(',')
            .map(|s| s.trim().to_string())
            .collect()
    };
    let mut templates = Vec::new();
    let mut seen = BTreeSet::new();
    for id in &ids {
        if !seen.insert(id.clone()) {
            continue;
        }
        templates.push(
            scenarios::builtin(id, 0)
                .ok_or_else(|| CliError::Usage(format!("unknown scenario id {id:?}")))?,
        );
    }
    let seeds: Vec<u64> = (0..args.seeds).collect();
    let batch = sim::run_batch(&templates, &seeds, &array);

    ensure_out_dir(&args.out)?;
    write_file(&args.out.join("runs.csv"), &sim::runs_csv(&batch.runs))?;
    let aggregate = sim::aggregate_csv(&batch.aggregates);
    write_file(&args.out.join("aggregate.csv"), &aggregate)?;
    write_file(
        &args.out.join("aggregate.json"),
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&batch.aggregates).expect("aggregates serialize")
        ),
    )?;
    print!("{aggregate}");
    Ok(())
}
