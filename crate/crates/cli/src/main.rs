//! `booksuccess` command-line tool.
//!
//! Exit codes: 0 success, 1 input error, 2 internal or numeric error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "booksuccess",
    version,
    about = "Predict book success from text and readability"
)]
struct Cli {
    /// Worker threads (default: number of processors).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

/// Flags shared by commands that featurize or train.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value setting; repeatable, applied after --config.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Seed for every stochastic step.
    #[arg(long)]
    seed: Option<u64>,
    /// Book section: first:K, last:K or full.
    #[arg(long)]
    section: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Text counts and the five readability indices for each file.
    Readability {
        files: Vec<PathBuf>,
        /// Write CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        fkg_paper_sign: bool,
    },
    /// Hashed sentence embeddings (.semb) and readability scores per book.
    Featurize {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train a classifier with validation-based model selection.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for model.bpmd, history.csv and split.csv.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a checkpoint on a test manifest.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for report and prediction CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also score a majority-class baseline fitted on this manifest.
        #[arg(long, value_name = "TRAIN_MANIFEST")]
        baseline_from: Option<PathBuf>,
    },
    /// McNemar test between two prediction files over the same books.
    Mcnemar {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gradients of the Successful output with respect to the readability inputs.
    Attribute {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// logit or probability.
        #[arg(long, default_value = "logit")]
        target: String,
        /// Output directory for attribution CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Averaged book embeddings with genres, as CSV.
    ExportVectors {
        #[arg(long)]
        manifest: PathBuf,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: cannot start {jobs} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Readability {
            files,
            out,
            fkg_paper_sign,
        } => commands::readability(&files, out.as_deref(), fkg_paper_sign),
        Command::Featurize {
            manifest,
            out,
            common,
        } => commands::featurize(&manifest, &out, &common),
        Command::Train {
            manifest,
            out,
            common,
        } => commands::train(&manifest, &out, &common),
        Command::Eval {
            checkpoint,
            manifest,
            out,
            baseline_from,
        } => commands::eval(
            &checkpoint,
            &manifest,
            out.as_deref(),
            baseline_from.as_deref(),
        ),
        Command::Mcnemar { a, b, out } => commands::mcnemar(&a, &b, out.as_deref()),
        Command::Attribute {
            checkpoint,
            manifest,
            target,
            out,
        } => commands::attribute(&checkpoint, &manifest, &target, out.as_deref()),
        Command::ExportVectors {
            manifest,
            out,
            common,
        } => commands::export_vectors(&manifest, &out, &common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
