mod bench;
mod render;
mod repl;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qutedb_core::{Config, Engine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "qutedb",
    version,
    about = "Hybrid quantum-classical SQL engine on a simulated device"
)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base RNG seed for sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Shots per quantum sampling round.
    #[arg(long, global = true)]
    shots: Option<usize>,
    /// JSON device model file.
    #[arg(long, global = true)]
    device: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    output: OutputFormat,
    /// SQL script run silently before the command, e.g. to create tables.
    #[arg(long, global = true)]
    load: Vec<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Interactive SQL prompt (the default).
    Repl,
    /// Execute a SQL script statement by statement.
    Run { file: PathBuf },
    /// Print the hybrid plan of a SELECT.
    Explain { sql: String },
    /// Crossover and Grover-success sweeps, written as CSV.
    #[command(subcommand)]
    Bench(bench::BenchCommand),
}

fn config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(s) = cli.shots {
        cfg.shots = s;
    }
    if let Some(d) = &cli.device {
        cfg.device_path = Some(d.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_script(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn engine(cli: &Cli, cfg: Config) -> Result<Engine> {
    let mut engine = Engine::new(cfg)?;
    for script in &cli.load {
        engine.set_base_dir(script.parent().unwrap_or(Path::new(".")));
        engine
            .run_script(&read_script(script)?)
            .with_context(|| format!("in {}", script.display()))?;
    }
    engine.set_base_dir(Path::new("."));
    Ok(engine)
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = config(cli)?;
    match &cli.command {
        None | Some(Command::Repl) => {
            let mut e = engine(cli, cfg)?;
            let stdin = std::io::stdin();
            Ok(repl::repl(
                &mut e,
                stdin.lock(),
                &mut std::io::stdout(),
                cli.output,
            )?)
        }
        Some(Command::Run { file }) => {
            let mut e = engine(cli, cfg)?;
            e.set_base_dir(file.parent().unwrap_or(Path::new(".")));
            Ok(repl::run_script(
                &mut e,
                &read_script(file)?,
                &mut std::io::stdout(),
                cli.output,
            ))
        }
        Some(Command::Explain { sql }) => {
            let e = engine(cli, cfg)?;
            let sql = sql.trim().trim_end_matches(';');
            print!("{}", e.explain(sql)?);
            Ok(true)
        }
        Some(Command::Bench(b)) => {
            if !cli.load.is_empty() {
                bail!("--load has no effect on bench commands");
            }
            bench::run(b, &cfg, &mut std::io::stdout())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
