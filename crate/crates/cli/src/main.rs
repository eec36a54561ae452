//! `gpsav` — config-driven runs of the Gauss collocation SAV solver for the
//! rotating Gross-Pitaevskii equation.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use gpsav::{Error, ExperimentConfig};

const EXIT_CONFIG: i32 = 2;
const EXIT_IO: i32 = 3;
const EXIT_DIVERGED: i32 = 4;
const EXIT_FORMAT: i32 = 5;

const PRESETS: &[(&str, &str)] = &[
    ("gaussian-3d", include_str!("../presets/gaussian-3d.cfg")),
    ("gaussian-2d", include_str!("../presets/gaussian-2d.cfg")),
    (
        "vortex-lattice-2d",
        include_str!("../presets/vortex-lattice-2d.cfg"),
    ),
];

#[derive(Parser)]
#[command(
    name = "gpsav",
    version,
    about = "Mass- and energy-conserving solver for the rotating Gross-Pitaevskii equation",
    after_long_help = "\
EXIT CODES:
    0   success
    2   configuration or argument error (also used by argument parsing)
    3   i/o failure
    4   the stage solver diverged or produced non-finite values
    5   malformed snapshot file

ENVIRONMENT:
    GPSAV_THREADS   cap the number of worker threads used internally
"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to a config file (flat `section.key = value` text)
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset: gaussian-3d, gaussian-2d, vortex-lattice-2d
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (shorthand for --override output.dir=...)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override a config key, repeatable (e.g. --override time.tau=0.005)
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write manifest, diagnostics CSV and snapshots
    Run(ConfigArgs),
    /// Temporal self-convergence study over the config's converge.taus ladder
    Converge(ConfigArgs),
    /// Print the header and a summary of a field snapshot
    Inspect {
        /// Snapshot file to inspect
        path: PathBuf,
    },
}

fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig, Error> {
    let text = match (&args.config, &args.preset) {
        (Some(path), None) => std::fs::read_to_string(path)?,
        (None, Some(name)) => PRESETS
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| {
                let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                Error::Config(format!(
                    "unknown preset `{name}` (available: {})",
                    known.join(", ")
                ))
            })?,
        _ => {
            return Err(Error::Config(
                "exactly one of --config or --preset is required".into(),
            ))
        }
    };
    let mut overrides: Vec<(String, String)> = Vec::new();
    if let Some(dir) = &args.output {
        overrides.push(("output.dir".into(), dir.display().to_string()));
    }
    for item in &args.overrides {
        let Some((k, v)) = item.split_once('=') else {
            return Err(Error::Config(format!(
                "--override expects KEY=VALUE, got `{item}`"
            )));
        };
        overrides.push((k.trim().into(), v.trim().into()));
    }
    ExperimentConfig::from_sources(&text, &overrides)
}

fn cmd_run(args: &ConfigArgs) -> Result<(), Error> {
    let config = load_config(args)?;
    let summary = gpsav::run(&config)?;
    println!(
        "completed {} steps (t = {})",
        summary.n_steps,
        summary.n_steps as f64 * config.tau
    );
    println!(
        "mass drift {:.3e}, modified-energy drift {:.3e}, Hamiltonian-energy drift {:.3e}",
        summary.drift.max_mass_err(),
        summary.drift.max_quad_err(),
        summary.drift.max_ham_err()
    );
    println!("artifacts in {}", summary.output_dir.display());
    Ok(())
}

fn cmd_converge(args: &ConfigArgs) -> Result<(), Error> {
    let config = load_config(args)?;
    let taus = config.converge_taus.clone().ok_or_else(|| {
        Error::Config("converge.taus must list the tau ladder for this command".into())
    })?;
    let table = gpsav::convergence_study(&config, &taus)?;
    println!(
        "self-convergence, stages = {} (reference: stages = 3, tau = {})",
        table.stages, table.reference_tau
    );
    println!("{:>12}  {:>14}  {:>8}", "tau", "error_inf", "rate");
    for (i, (tau, err)) in table.taus.iter().zip(&table.errors_inf).enumerate() {
        if i == 0 {
            println!("{tau:>12}  {err:>14.6e}  {:>8}", "-");
        } else {
            println!("{tau:>12}  {err:>14.6e}  {:>8.3}", table.rates[i - 1]);
        }
    }
    println!("table written to {}", config.output_dir.join("rates.csv").display());
    Ok(())
}

fn cmd_inspect(path: &PathBuf) -> Result<(), Error> {
    let snap = gpsav::snapshot::read(path)?;
    let grid = snap.field.grid();
    println!("snapshot {}", path.display());
    println!("  dim     = {}", grid.dim());
    println!(
        "  sizes   = {}",
        grid.sizes()
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(" x ")
    );
    for axis in 0..grid.dim() {
        println!(
            "  axis {axis}  = [{}, {}), h = {}",
            grid.lower()[axis],
            grid.upper()[axis],
            grid.spacing()[axis]
        );
    }
    println!("  time    = {}", snap.time);
    println!("  q       = {}", snap.q);
    println!("  mass    = {}", snap.field.norm_h().powi(2));
    println!("  max|psi|= {}", snap.field.norm_inf());
    Ok(())
}

fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Unsupported(_) | Error::GridMismatch => {
            EXIT_CONFIG
        }
        Error::StepDiverged { .. } | Error::NumericalBlowup => EXIT_DIVERGED,
        Error::Format(_) => EXIT_FORMAT,
        Error::Io(_) => EXIT_IO,
        Error::AtStep { .. } => EXIT_DIVERGED,
    }
}

fn main() {
    gpsav::init_threads_from_env();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Converge(args) => cmd_converge(args),
        Command::Inspect { path } => cmd_inspect(path),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        let mut source = std::error::Error::source(&err);
        while let Some(s) = source {
            eprintln!("  caused by: {s}");
            source = s.source();
        }
        std::process::exit(exit_code(&err));
    }
}
