use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybspec_cli::commands::{self, response::Grid, Globals};

/// Spectral GNN experiments: unified accuracy table, K ablation,
/// instability-poisoning demo and filter responses.
#[derive(Parser)]
#[command(name = "hybspec", version)]
struct Cli {
    /// JSON experiment config; keys left out take the command's defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Every model on every dataset at one K.
    Unified,
    /// Accuracy versus polynomial degree, with an SVG chart.
    KAblation,
    /// v3 and v4 side by side past the Krawtchouk overflow degree.
    PoisonDemo {
        /// Degree to run at (default: the measured overflow degree).
        #[arg(long)]
        k: Option<usize>,
    },
    /// Learned filter response of a checkpoint on an eigenvalue grid.
    Response {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 101)]
        grid_points: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda_min: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        lambda_max: f64,
    },
    /// Write the configured SBM datasets as graph files.
    GenSbm,
    /// Train one model and save a checkpoint.
    Train,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs == Some(0) {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    let g = Globals { config: cli.config, seed: cli.seed, out_dir: cli.out_dir, jobs: cli.jobs };
    let result = match cli.command {
        Cmd::Unified => commands::unified::run(&g),
        Cmd::KAblation => commands::ablation::run(&g),
        Cmd::PoisonDemo { k } => commands::poison::run(&g, k),
        Cmd::Response { checkpoint, grid_points, lambda_min, lambda_max } => {
            let grid = Grid { points: grid_points, lambda_min, lambda_max };
            commands::response::run(&g, &checkpoint, &grid)
        }
        Cmd::GenSbm => commands::gen_sbm::run(&g),
        Cmd::Train => commands::train::run(&g),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
