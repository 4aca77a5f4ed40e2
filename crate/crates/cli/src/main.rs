use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use maser_core::figures::{reproduce_figure_with_grid, FigureId};
use maser_core::sweep::{render, Format, SweepConfig};
use maser_core::sync::{phase_distribution, DEFAULT_GRID};
use maser_core::{analyze_point, MaserParams, SolverChoice};

/// Steady states, synchronization and thermodynamic bounds of a four-level
/// thermal maser.
#[derive(Debug, Parser)]
#[command(name = "maser", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one steady state and print it with all observables (JSON).
    Steady(PointArgs),
    /// Run a config-driven parameter sweep.
    Sweep(SweepArgs),
    /// Export the phase distribution S(phi21, phi31) of one steady state as CSV.
    PhaseDist(PhaseArgs),
    /// Print the bound report of one steady state (JSON).
    Bounds(PointArgs),
    /// Regenerate the data behind a published panel.
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Parameter file (JSON, MaserParams field names); defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// auto, analytic, nullspace or evolve.
    #[arg(long, default_value = "auto")]
    solver: SolverChoice,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Sweep config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the solver named in the config.
    #[arg(long)]
    solver: Option<SolverChoice>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct PhaseArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Grid points per phase axis.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// fig2a-d, fig3a-b, fig4a-b, fig5a-d.
    id: FigureId,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Phase grid for the fig2 panels.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
}

fn load_params(path: Option<&Path>) -> Result<MaserParams> {
    let Some(path) = path else {
        return Ok(MaserParams::default());
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Steady(args) => {
            let params = load_params(args.config.as_deref())?;
            let point = analyze_point(params, args.solver)?;
            write_output(args.out.as_deref(), &pretty(&point.to_json()))
        }
        Command::Bounds(args) => {
            let params = load_params(args.config.as_deref())?;
            let point = analyze_point(params, args.solver)?;
            let report = serde_json::to_value(point.bounds).expect("report serializes");
            write_output(args.out.as_deref(), &pretty(&report))
        }
        Command::PhaseDist(args) => {
            let params = load_params(args.point.config.as_deref())?;
            let point = analyze_point(params, args.point.solver)?;
            let dist = phase_distribution(&point.solution.rho, args.grid)?;
            write_output(args.point.out.as_deref(), &dist.to_csv())
        }
        Command::Sweep(args) => {
            let mut config = SweepConfig::from_json_file(&args.config)?;
            if let Some(solver) = args.solver {
                config.solver = solver;
            }
            let rows = maser_core::sweep::run_sweep(&config)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                log::warn!("{failed} of {} sweep points failed; see the error column", rows.len());
            }
            let text = render(&rows, config.sweep_axis, &config.outputs, args.format)?;
            write_output(args.out.as_deref(), &text)
        }
        Command::Figure(args) => {
            for path in reproduce_figure_with_grid(args.id, &args.out, args.grid)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
