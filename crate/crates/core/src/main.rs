use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sbs::cli::{dispatch, parse_config, CliCommand, RunConfig};

/// Sequential best-response dynamics for side-by-side first-price bidding.
#[derive(Parser)]
#[command(name = "sbs", version, about)]
struct Args {
    /// JSON run configuration (required for every command except
    /// `counterexample`, which has a built-in default).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory for output files.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,

    /// Override the config's Monte Carlo seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Override the config's Monte Carlo sample count.
    #[arg(long, global = true, value_name = "N")]
    n: Option<u64>,

    /// Override the config's Monte Carlo worker count.
    #[arg(long, global = true, value_name = "N")]
    shards: Option<usize>,

    /// Override the config's probe start bids (comma separated).
    #[arg(long, global = true, value_name = "B,B,...", value_delimiter = ',')]
    starts: Option<Vec<f64>>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Compute the equilibrium bid pair.
    Solve,
    /// Record the full best-response iteration trace.
    Iterate,
    /// Check start-independence of the computed equilibrium.
    Probe,
    /// Iterate from the extreme seeds 0 and v.
    Extremal,
    /// Scan the non-uniqueness counterexample for its equilibrium continuum.
    Counterexample,
    /// Validate the equilibrium by Monte Carlo simulation.
    Validate,
    /// Tabulate the numeric best-response curve for bidder 1.
    BrCurve,
}

impl From<Command> for CliCommand {
    fn from(command: Command) -> Self {
        match command {
            Command::Solve => CliCommand::Solve,
            Command::Iterate => CliCommand::Iterate,
            Command::Probe => CliCommand::Probe,
            Command::Extremal => CliCommand::Extremal,
            Command::Counterexample => CliCommand::Counterexample,
            Command::Validate => CliCommand::Validate,
            Command::BrCurve => CliCommand::BrCurve,
        }
    }
}

fn load_config(args: &Args) -> sbs::Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            parse_config(&text)?
        }
        None => match args.command {
            Command::Counterexample => RunConfig::counterexample_default(),
            _ => {
                return Err(sbs::Error::Config {
                    message: "this command requires --config <PATH>".to_string(),
                })
            }
        },
    };
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(n) = args.n {
        config.n = Some(n);
    }
    if let Some(shards) = args.shards {
        config.shards = Some(shards);
    }
    if let Some(starts) = &args.starts {
        config.starts = Some(starts.clone());
    }
    Ok(config)
}

fn run(args: &Args) -> sbs::Result<()> {
    let config = load_config(args)?;
    let report = dispatch(args.command.into(), &config, &args.out)?;
    println!("{}", report.summary);
    for file in &report.files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SBS_LOG")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({
                "error": e.name(),
                "message": e.to_string(),
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
