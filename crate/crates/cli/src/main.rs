//! `nsse` — train, apply, tune, diagnose, and benchmark supervised smooth
//! embeddings from the command line.
//!
//! Every command is deterministic given its flags and seed; anything that
//! writes files also writes a `<output>.manifest.json` recording the resolved
//! configuration, input hashes, seed, and toolkit version. Errors go to
//! stderr as a single line and the process exits with code 1.
//!
//! `NSSE_THREADS` caps internal parallelism (0 or unset = automatic); results
//! are independent of the thread count.

mod commands;
mod csvio;
mod manifest;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "nsse",
    version,
    about = "Supervised nonlinear dimensionality reduction with a smooth RBF out-of-sample extension"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn an embedding and its interpolator from a labeled CSV.
    Train(commands::train::TrainArgs),
    /// Embed a test CSV through a trained model and classify by nearest
    /// training embedding.
    Classify(commands::classify::ClassifyArgs),
    /// Map a CSV of points into the embedded domain.
    Embed(commands::embed::EmbedArgs),
    /// Cross-validate the objective weights, one parameter at a time.
    Cv(commands::cv::CvArgs),
    /// Check the separation/regularity condition of a trained model.
    Diagnose(commands::diagnose::DiagnoseArgs),
    /// Sweep (train size x seed x method) and tabulate misclassification.
    Benchmark(commands::benchmark::BenchmarkArgs),
}

fn main() {
    configure_thread_pool();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            fail(&e.to_string());
        }
    };
    let outcome = match cli.command {
        Command::Train(args) => commands::train::run(args),
        Command::Classify(args) => commands::classify::run(args),
        Command::Embed(args) => commands::embed::run(args),
        Command::Cv(args) => commands::cv::run(args),
        Command::Diagnose(args) => commands::diagnose::run(args),
        Command::Benchmark(args) => commands::benchmark::run(args),
    };
    if let Err(e) = outcome {
        fail(&format!("{e:#}"));
    }
}

fn configure_thread_pool() {
    if let Ok(value) = std::env::var("NSSE_THREADS") {
        let parsed: Option<usize> = value.trim().parse().ok();
        match parsed {
            Some(0) | None => {}
            Some(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

/// Single-line machine-parseable error, exit code 1.
fn fail(message: &str) -> ! {
    let one_line = message.replace('\n', " | ");
    eprintln!("error: {}", one_line.trim());
    std::process::exit(1);
}
