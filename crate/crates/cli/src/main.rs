//! `freqsec` command-line front end.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "freqsec", version, about = "Nodal frequency-security assessment")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate PMU trajectories of every node under every scenario.
    Simulate,
    /// Fit effective parameters to simulated trajectories.
    Fit,
    /// Build the offline table of effective and critical inertia.
    TableBuild,
    /// Assess an online case against the offline table.
    Assess {
        /// Build the offline table first instead of reading it.
        #[arg(long)]
        build_table: bool,
        /// Online case (a located scenario), overriding the configuration.
        #[arg(long)]
        online: Option<PathBuf>,
        /// Neighbour count, overriding the configuration.
        #[arg(long)]
        neighbors: Option<usize>,
    },
    /// Run the bundled five-node example end to end.
    Demo {
        /// Only write the example's input files.
        #[arg(long)]
        inputs_only: bool,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Failure::config(anyhow::anyhow!("--jobs must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(e.into()))?;
    }
    if let Command::Demo { inputs_only } = cli.command {
        let out = cli.out.unwrap_or_else(|| PathBuf::from("demo_out"));
        return commands::demo(&out, cli.seed.unwrap_or(freqsec::demo::DEMO_SEED), inputs_only);
    }
    let path = cli
        .config
        .ok_or_else(|| Failure::config(anyhow::anyhow!("--config is required for this command")))?;
    let resolved = config::RunConfig::load(&path)
        .map_err(Failure::config)?
        .resolve(cli.out, cli.seed);
    match cli.command {
        Command::Simulate => commands::simulate(&resolved),
        Command::Fit => commands::fit(&resolved),
        Command::TableBuild => commands::table_build(&resolved).map(|_| ()),
        Command::Assess {
            build_table,
            online,
            neighbors,
        } => commands::assess(&resolved, build_table, online, neighbors),
        Command::Demo { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
