use std::path::PathBuf;

use clap::Parser;
use tunnelsplit::cli::{main_with, Command};

/// Transmission/reflection decomposition of 1D barrier scattering.
#[derive(Debug, Parser)]
#[command(name = "tunnelsplit", version)]
struct Args {
    /// Subcommand to run.
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides `workers` in the config).
    #[arg(long)]
    workers: Option<usize>,
}

fn main() {
    let args = Args::parse();
    std::process::exit(main_with(args.command, &args.config, args.out, args.workers));
}
