use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pcm_tes::config::{resolve_config, RunConfig, CONFIG_ENV};
use pcm_tes::output::{write_comparisons, write_records, write_timings, OutputFormat};
use pcm_tes::scenario::{
    benchmark, build_canonical_scenarios, compare_runs, Scenario, MIN_REPETITIONS,
};
use pcm_tes::{ModelKind, Tank};

/// Simulate a PCM cold thermal-energy-storage tank.
#[derive(Parser, Debug)]
#[command(name = "pcm-tes", version, about)]
struct Cli {
    /// Configuration file; defaults to the shipped configuration.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write every step record.
    Simulate(SimulateArgs),
    /// Compare the accelerated model with the fixed-step reference.
    Compare(CompareArgs),
    /// Time both models.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Number of capsule layers; defaults to the configured value.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    layers: Option<u32>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format; defaults to the configured value.
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// reference | accelerated
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,

    /// Major step in seconds.
    #[arg(long, value_parser = parse_positive)]
    dt: Option<f64>,

    /// full-charge | full-discharge | partial | path to a scenario file.
    #[arg(long, default_value = "full-charge")]
    scenario: String,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// full-charge | full-discharge | partial | all | path to a scenario file.
    #[arg(long)]
    scenario: String,

    /// Comma-separated candidate steps in seconds.
    #[arg(long, value_delimiter = ',', value_parser = parse_positive, default_value = "60,180,300")]
    dt_list: Vec<f64>,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// full-charge | full-discharge | partial | all | path to a scenario file.
    #[arg(long, default_value = "all")]
    scenario: String,

    /// Comma-separated steps in seconds; the reference step is always timed.
    #[arg(long, value_delimiter = ',', value_parser = parse_positive, default_value = "2,60,180,300")]
    dt_list: Vec<f64>,

    /// Repetitions per configuration (median is reported).
    #[arg(long, default_value_t = MIN_REPETITIONS, value_parser = parse_reps)]
    reps: usize,

    #[command(flatten)]
    common: Common,
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        Ok(v) => Err(format!("must be a positive number of seconds, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_reps(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s
        .parse()
        .map_err(|e: std::num::ParseIntError| e.to_string())?;
    if n < MIN_REPETITIONS {
        return Err(format!(
            "at least {MIN_REPETITIONS} repetitions are required"
        ));
    }
    Ok(n)
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: pcm_tes::Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: pcm_tes::Error| e.to_string())
}

struct Setup {
    config: RunConfig,
    tank: Tank,
    format: OutputFormat,
    out: Option<PathBuf>,
}

fn setup(config_path: Option<&Path>, common: &Common) -> Result<Setup> {
    let config = resolve_config(config_path).context("loading configuration")?;
    let mut tank = config.tank()?;
    if let Some(n) = common.layers {
        tank = tank.with_layers(n as usize)?;
    }
    let format = common.format.unwrap_or(config.output.format);
    let out = common.out.clone().or_else(|| config.output.path.clone());
    Ok(Setup {
        config,
        tank,
        format,
        out,
    })
}

fn scenarios(name: &str, config: &RunConfig, allow_all: bool) -> Result<Vec<Scenario>> {
    let canonical = build_canonical_scenarios(&config.nominal);
    if allow_all && name == "all" {
        return Ok(canonical.all().into_iter().cloned().collect());
    }
    if let Some(s) = canonical.by_name(name) {
        return Ok(vec![s.clone()]);
    }
    let path = Path::new(name);
    if !path.exists() {
        bail!("unknown scenario `{name}`: expected full-charge, full-discharge, partial or a file");
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
    Ok(vec![Scenario::from_toml_str(
        &text,
        &config.nominal,
        &config.refrigerant,
    )?])
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn simulate(config_path: Option<&Path>, args: &SimulateArgs) -> Result<()> {
    let s = setup(config_path, &args.common)?;
    let model = args.model.unwrap_or(s.config.model.kind);
    let dt = args.dt.unwrap_or(match model {
        ModelKind::Reference => s.tank.reference_step_bound(),
        ModelKind::Accelerated => s.config.model.dt,
    });
    let scenario = scenarios(&args.scenario, &s.config, false)?.remove(0);
    let report = scenario.run(model, dt, &s.tank)?;
    let mut out = open_out(s.out.as_deref())?;
    write_records(&mut out, s.format, &report, &s.tank.pcm, &s.config.hash()?)?;
    out.flush()?;
    Ok(())
}

fn compare(config_path: Option<&Path>, args: &CompareArgs) -> Result<()> {
    let s = setup(config_path, &args.common)?;
    let oracle_dt = s.tank.reference_step_bound();
    let mut reports = Vec::new();
    for scenario in scenarios(&args.scenario, &s.config, true)? {
        let oracle = scenario.run(ModelKind::Reference, oracle_dt, &s.tank)?;
        for &dt in &args.dt_list {
            let candidate = scenario.run(ModelKind::Accelerated, dt, &s.tank)?;
            reports.push(compare_runs(&oracle, &candidate)?);
        }
    }
    let mut out = open_out(s.out.as_deref())?;
    write_comparisons(&mut out, s.format, &reports)?;
    out.flush()?;
    Ok(())
}

fn bench(config_path: Option<&Path>, args: &BenchArgs) -> Result<()> {
    let s = setup(config_path, &args.common)?;
    let mut rows = Vec::new();
    for scenario in scenarios(&args.scenario, &s.config, true)? {
        rows.extend(benchmark(&scenario, &args.dt_list, args.reps, &s.tank)?);
    }
    let mut out = open_out(s.out.as_deref())?;
    write_timings(&mut out, s.format, &rows)?;
    out.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Simulate(args) => simulate(config, args),
        Command::Compare(args) => compare(config, args),
        Command::Bench(args) => bench(config, args),
    }
}
