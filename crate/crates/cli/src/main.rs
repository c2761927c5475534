use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hearability::par::with_workers;
use hearability_cli::{render_output, run, write_output, Command, FigureName, RunConfig};

#[derive(Parser)]
#[command(
    name = "hearability",
    version,
    about = "Hearability sweeps, simulations and figure recipes"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one configuration key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[arg(long, global = true, env = "HEARABILITY_SEED", value_name = "U64")]
    seed: Option<u64>,

    /// Monte Carlo realizations (E911 trials for `e911` and `figure fig2`).
    #[arg(long, global = true, value_name = "N")]
    realizations: Option<usize>,

    /// CSV destination; stdout when omitted (figures default to `<name>.csv`).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Leave out the `# generated` header line.
    #[arg(long, global = true)]
    no_timestamp: bool,

    /// Worker threads for the data-parallel loops (0 = all cores).
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    workers: usize,

    /// Also write a matplotlib script next to the CSV.
    #[arg(long, global = true)]
    plot: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analytic evaluators over the β/γ grid.
    Analytic,
    /// Monte Carlo (and optionally analytic) curves over the β/γ grid.
    Simulate,
    /// Random frequency reuse: composition and simulation.
    Reuse,
    /// Hearability distributions of hexagonal and PPP deployments.
    Hexgrid,
    /// E911 percentile errors per minimum hearability.
    E911,
    /// Reproduce one figure.
    Figure {
        #[arg(value_enum)]
        name: FigureName,
    },
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::from_text(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        cfg.apply_override(o).with_context(|| format!("--set {o}"))?;
    }
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
        cfg.e911.seed = seed;
    }
    if let Some(n) = cli.realizations {
        cfg.sim.realizations = n;
        cfg.e911.trials = n;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = load(cli)?;
    let command = match &cli.command {
        Cmd::Analytic => Command::Analytic,
        Cmd::Simulate => Command::Simulate,
        Cmd::Reuse => Command::Reuse,
        Cmd::Hexgrid => Command::Hexgrid,
        Cmd::E911 => Command::E911,
        Cmd::Figure { name } => Command::Figure(*name),
    };
    let output = with_workers(cli.workers, || run(command, &cfg))?;
    let out = cli.out.clone().or_else(|| match command {
        Command::Figure(name) => Some(PathBuf::from(format!("{}.csv", name.name()))),
        _ => None,
    });
    let timestamp = !cli.no_timestamp;
    match out {
        Some(path) => {
            let plot = cli.plot || matches!(command, Command::Figure(_));
            if let Some(script) = write_output(&output, &path, timestamp, plot)? {
                eprintln!("wrote {} and {}", path.display(), script.display());
            } else {
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            if cli.plot {
                anyhow::bail!("--plot needs --out");
            }
            print!("{}", render_output(&output, timestamp));
        }
    }
    Ok(())
}
