use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tempvec_cli::artifacts::Part;
use tempvec_cli::commands::{self, Anchor, Outcome, Subject};
use tempvec_cli::{CliError, Overrides, Result, RunConfig};

#[derive(Parser)]
#[command(
    name = "tempvec",
    version,
    about = "Time-aware item embeddings: train, evaluate, recommend"
)]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Training threads; more than one is fast but not reproducible.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Clean and split the raw log into train/validation/test files.
    Preprocess,
    /// Train a model and write it with its training log.
    Train {
        #[arg(long, value_enum, default_value = "train-val")]
        data: Part,
    },
    /// Score a model and write a metrics report.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: Part,
    },
    /// Rank unseen items for a user or an explicit history.
    Recommend {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, conflicts_with = "history", required_unless_present = "history")]
        user: Option<String>,
        /// File with one item id per line.
        #[arg(long)]
        history: Option<PathBuf>,
        #[arg(short, long, default_value_t = 10)]
        k: usize,
        /// Write the list here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train and score every point of the [grid] section on validation.
    GridSearch {
        /// Grid points trained concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Per-user temporal profile table and dataset aggregates.
    Stats {
        #[arg(long, value_enum, default_value = "train")]
        split: Part,
    },
    /// Weight curves of one user against anchor events.
    ExportCurves {
        #[arg(long)]
        user: String,
        /// Comma-separated: first, middle, last or event indices.
        #[arg(long, value_delimiter = ',', default_values = ["first", "middle", "last"])]
        anchors: Vec<String>,
        #[arg(long, value_enum, default_value = "train-val")]
        split: Part,
    },
}

fn run(cli: Cli) -> Result<Outcome> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let cfg = base.finalize(&Overrides {
        seed: cli.seed,
        workers: cli.workers,
        output_dir: cli.output_dir,
    })?;
    match cli.command {
        Command::Preprocess => commands::preprocess(&cfg),
        Command::Train { data } => commands::train(&cfg, data),
        Command::Evaluate { model, split } => commands::evaluate(&cfg, &model, split),
        Command::Recommend {
            model,
            user,
            history,
            k,
            output,
        } => {
            let subject = match (user, history) {
                (Some(u), _) => Subject::User(u),
                (None, Some(h)) => Subject::HistoryFile(h),
                (None, None) => return Err(CliError::config("give --user or --history")),
            };
            commands::recommend(&cfg, &model, &subject, k, output.as_deref())
        }
        Command::GridSearch { jobs } => commands::grid_search(&cfg, jobs),
        Command::Stats { split } => commands::stats(&cfg, split),
        Command::ExportCurves {
            user,
            anchors,
            split,
        } => {
            let anchors = anchors
                .iter()
                .map(|a| a.parse())
                .collect::<Result<Vec<Anchor>>>()?;
            commands::export_curves(&cfg, &user, &anchors, split)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", out.stdout);
            for p in &out.outputs {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {}", e.category, e.message.replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
