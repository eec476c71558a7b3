use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rodshape_cli::{commands, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "rodshape", version, about = "Recover a rod's cross-section area from its amplitude-frequency response")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Noise seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a response dataset for the configured profile.
    Forward,
    /// Recover the profile from a dataset.
    Invert,
    /// Compare a recovered profile with the configured true one.
    Compare,
    /// Run a worked example end to end.
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        number: u8,
    },
}

fn load(path: Option<&Path>, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let path = path.ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = seed {
        config.noise.seed = seed;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = || load(cli.config.as_deref(), cli.seed);
    match cli.command {
        Command::Forward => commands::run_forward(&config()?, &cli.out),
        Command::Invert => commands::run_invert(&config()?, &cli.out).map(drop),
        Command::Compare => commands::run_compare(&config()?, &cli.out).map(drop),
        Command::Example { number } => commands::run_example(number, cli.seed, &cli.out).map(drop),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
