use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mbsplan_core::allocation::{build_allocation_lp, CostModel};
use mbsplan_core::pipeline::{
    parse_range, run_pipeline, sweep_cost_ratio, sweep_density_ratio, validate_scenario, write_sweep_csv,
    SweepResult,
};
use mbsplan_core::scenario::{load_scenario_file, Scenario};
use mbsplan_core::Error;

/// Plan static base stations and a moving-station fleet for a multi-region
/// network over a day.
#[derive(Parser)]
#[command(name = "mbsplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one scenario and write CSV/JSON artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the allocation linear program as plain text.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Vary the first-to-second region peak density ratio.
    SweepDensity(SweepArgs),
    /// Vary the static-to-mobile unit cost ratio.
    SweepCost(SweepArgs),
    /// Compare the delay model and the density search against oracles.
    Validate {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Scenario whose radio settings are used; defaults to the built-in one.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// start:stop:count, evenly spaced, both ends included.
    #[arg(long)]
    ratios: String,
    /// Scenario to sweep; defaults to the built-in two-district one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return report(e);
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => report(e),
    }
}

fn report(e: Error) -> ExitCode {
    let message = e.to_string();
    eprintln!("error: {message}");
    let mut source = std::error::Error::source(&e);
    while let Some(s) = source {
        let cause = s.to_string();
        if !message.contains(&cause) {
            eprintln!("  caused by: {cause}");
        }
        source = s.source();
    }
    if e.is_input_error() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("MBSPLAN_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("MBSPLAN_THREADS={value} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("cannot size the worker pool: {e}")))
}

fn scenario_from(config: Option<&Path>) -> Result<Scenario, Error> {
    match config {
        Some(path) => Ok(load_scenario_file(path)?),
        None => Ok(Scenario::reference()),
    }
}

fn execute(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Run { config, out, dump_lp } => {
            let artifacts = run_pipeline(&config, &out)?;
            let outcome = &artifacts.outcome;
            if let Some(path) = dump_lp {
                let scenario = load_scenario_file(&config)?;
                let areas: Vec<f64> = scenario.regions.iter().map(|r| r.area_km2).collect();
                let lp = build_allocation_lp(&outcome.demand, &areas, &CostModel::default())?;
                fs::write(&path, lp.to_text()).map_err(|e| Error::Io { path, source: e })?;
            }
            println!("fleet size: {:.4} ({} vehicles)", outcome.plan.fleet_size, outcome.plan.fleet_size_ceil());
            println!("static-only stations: {:.4}", outcome.report.static_only_total);
            println!("hybrid stations: {:.4}", outcome.report.hybrid_total);
            println!("total saving: {:.2}%", 100.0 * outcome.report.total_saving_fraction);
            println!("artifacts: {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::SweepDensity(args) => {
            let scenario = scenario_from(args.config.as_deref())?;
            let ratios = parse_range(&args.ratios)?;
            let sweep = sweep_density_ratio(&scenario, &ratios);
            emit_sweep(&sweep, args.out.as_deref())
        }
        Command::SweepCost(args) => {
            let scenario = scenario_from(args.config.as_deref())?;
            let ratios = parse_range(&args.ratios)?;
            let sweep = sweep_cost_ratio(&scenario, &ratios)?;
            emit_sweep(&sweep, args.out.as_deref())
        }
        Command::Validate { trials, seed, config } => {
            let scenario = scenario_from(config.as_deref())?;
            let report = validate_scenario(&scenario, trials, seed)?;
            println!("{report}");
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn emit_sweep(sweep: &SweepResult, out: Option<&Path>) -> Result<ExitCode, Error> {
    match out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            write_sweep_csv(file, sweep, path)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_sweep_csv(&mut lock, sweep, Path::new("<stdout>"))?;
            let _ = lock.flush();
        }
    }
    for (value, message) in &sweep.failures {
        eprintln!("point {value} failed: {message}");
    }
    Ok(if sweep.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
