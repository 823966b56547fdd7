//! Command-line front end: run scenarios, sweep stability regions, list
//! golden scenarios. Writes timeseries.csv, summary.json, and region.csv.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use loopshield::attack::AttackKind;
use loopshield::compensate::{stability_region, StabilityRegion};
use loopshield::config::load_scenario;
use loopshield::lti::TransferFunction;
use loopshield::scenarios;
use loopshield::sim::{run_scenario, summarize, Scenario};

const EXIT_CONFIG: u8 = 1;
const EXIT_PIPELINE: u8 = 2;
const EXIT_EMPTY_REGION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "loopshield",
    version,
    about = "Closed-loop attack detection and compensation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write timeseries.csv plus summary.json.
    Run(RunArgs),
    /// Sweep the (kp, ki) stability region of a scenario's loop and write
    /// region.csv.
    Region(SourceArgs),
    /// List the built-in golden scenarios.
    ListGolden,
}

#[derive(Args)]
struct SourceArgs {
    /// Path to a scenario file.
    #[arg(long, conflicts_with = "golden")]
    scenario: Option<PathBuf>,
    /// Name of a built-in golden scenario.
    #[arg(long)]
    golden: Option<String>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Disable the intrusion detector (and with it the compensator).
    #[arg(long)]
    no_ids: bool,
    /// Keep detection and identification but never swap controllers.
    #[arg(long)]
    no_compensation: bool,
    /// Also write region.csv from the identified model, when the
    /// compensation pipeline ran.
    #[arg(long)]
    export_region: bool,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8, error: anyhow::Error) -> CliError {
    CliError { code, error }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Region(args) => cmd_region(args),
        Command::ListGolden => {
            for g in scenarios::all() {
                println!("{}", g.name);
            }
            Ok(())
        }
    }
}

/// Scenario from --scenario or --golden; golden names also carry the
/// reference identified model used for region sweeps.
fn resolve(source: &SourceArgs) -> Result<(Scenario, Option<TransferFunction>), CliError> {
    match (&source.scenario, &source.golden) {
        (Some(path), None) => {
            let s = load_scenario(path).map_err(|e| fail(EXIT_CONFIG, anyhow!(e)))?;
            Ok((s, None))
        }
        (None, Some(name)) => {
            let golden = scenarios::by_name(name).ok_or_else(|| {
                fail(
                    EXIT_CONFIG,
                    anyhow!(
                        "unknown golden scenario {name:?}; try: {}",
                        scenarios::all()
                            .iter()
                            .map(|g| g.name)
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                )
            })?;
            let reference_model = match name.as_str() {
                "gain160" => Some(scenarios::reported_gain_attack_model()),
                "sse" => Some(scenarios::reported_sse_attack_model()),
                _ => None,
            };
            Ok((golden.scenario, reference_model))
        }
        _ => Err(fail(
            EXIT_CONFIG,
            anyhow!("give exactly one of --scenario <path> or --golden <name>"),
        )),
    }
}

fn ensure_out(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
        .map_err(|e| fail(EXIT_CONFIG, e))
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let (mut scenario, _) = resolve(&args.source)?;
    if args.no_ids {
        scenario.ids_enabled = false;
        scenario.compensation_enabled = false;
    }
    if args.no_compensation {
        scenario.compensation_enabled = false;
    }
    ensure_out(&args.source.out)?;

    let log = run_scenario(&scenario).map_err(|e| fail(EXIT_PIPELINE, anyhow!(e)))?;
    let summary = summarize(&log);

    let csv_path = args.source.out.join("timeseries.csv");
    let mut csv = BufWriter::new(
        File::create(&csv_path)
            .with_context(|| csv_path.display().to_string())
            .map_err(|e| fail(EXIT_CONFIG, e))?,
    );
    log.write_csv(&mut csv)
        .and_then(|()| csv.flush())
        .map_err(|e| fail(EXIT_CONFIG, anyhow!(e)))?;

    let json_path = args.source.out.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&json_path, json.as_bytes()).map_err(|e| fail(EXIT_CONFIG, anyhow!(e)))?;

    if args.export_region {
        if let Some(region) = &log.region {
            write_region(&args.source.out, region)?;
        } else {
            eprintln!("note: no region to export (compensation pipeline did not run)");
        }
    }

    if let Some(t) = summary.detection_time {
        println!("detection at {t} s");
    }
    if let Some(t) = summary.swap_time {
        println!(
            "controller swapped at {t} s (kp={}, ki={})",
            summary.selected_kp.unwrap_or(f64::NAN),
            summary.selected_ki.unwrap_or(f64::NAN)
        );
    }
    println!(
        "peak |y| = {:.6}, steady-state error = {:.6}{}",
        summary.peak_output,
        summary.steady_state_error,
        if summary.diverged { ", DIVERGED" } else { "" }
    );
    println!("wrote {}", args.source.out.display());

    // a run that was supposed to identify and compensate but could not is a
    // pipeline failure even though the log is complete
    if scenario.compensation_enabled
        && (summary.identification_failed || summary.compensation_error.is_some())
    {
        let why = summary
            .compensation_error
            .unwrap_or_else(|| "identification did not converge before the run ended".into());
        return Err(fail(EXIT_PIPELINE, anyhow!(why)));
    }
    Ok(())
}

fn cmd_region(args: SourceArgs) -> Result<(), CliError> {
    let (scenario, reference_model) = resolve(&args)?;
    // golden scenarios sweep their reference identified model; scenario
    // files sweep the attacked composition when an attack is configured,
    // else the plant itself
    let g = match reference_model {
        Some(m) => m,
        None => match &scenario.attack.kind {
            AttackKind::Gain(g) => TransferFunction::constant(*g, scenario.ts)
                .and_then(|m| m.series(&scenario.plant))
                .map_err(|e| fail(EXIT_CONFIG, anyhow!(e)))?,
            AttackKind::Lti(m) => m
                .series(&scenario.plant)
                .map_err(|e| fail(EXIT_CONFIG, anyhow!(e)))?,
            AttackKind::None => scenario.plant.clone(),
        },
    };
    ensure_out(&args.out)?;
    let region = stability_region(&g, &scenario.compensator.grid)
        .map_err(|e| fail(EXIT_PIPELINE, anyhow!(e)))?;
    if region.stable_count() == 0 {
        return Err(fail(
            EXIT_EMPTY_REGION,
            anyhow!("stability region is empty over the configured grid"),
        ));
    }
    write_region(&args.out, &region)?;
    println!(
        "{} of {} cells stable; wrote {}",
        region.stable_count(),
        region.cell_count(),
        args.out.join("region.csv").display()
    );
    Ok(())
}

fn write_region(dir: &Path, region: &StabilityRegion) -> Result<(), CliError> {
    let path = dir.join("region.csv");
    let mut w = BufWriter::new(
        File::create(&path)
            .with_context(|| path.display().to_string())
            .map_err(|e| fail(EXIT_CONFIG, e))?,
    );
    region
        .write_csv(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| fail(EXIT_CONFIG, anyhow!(e)))?;
    Ok(())
}
