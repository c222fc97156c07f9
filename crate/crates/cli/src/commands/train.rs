use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use nsse_core::dataset::standardize;
use nsse_core::optimizer::train;

use super::common::{DataFlags, TrainFlags};
use crate::csvio::{sibling_with_suffix, write_trace_csv};
use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data_flags: DataFlags,
    #[command(flatten)]
    pub train_flags: TrainFlags,
    /// Where to write the model file.
    #[arg(long)]
    pub out_model: PathBuf,
    /// Where to write the per-iteration trace CSV
    /// (default: `<out-model>.trace.csv`).
    #[arg(long)]
    pub out_trace: Option<PathBuf>,
}

pub fn run(args: TrainArgs) -> Result<()> {
    let started = Instant::now();
    let ds = args.data_flags.load()?;
    let (train_ds, record) = if args.train_flags.standardize {
        let (d, r) = standardize(&ds)?;
        (d, Some(r))
    } else {
        (ds, None)
    };
    let cfg = args.train_flags.to_config()?;
    let (model, trace) = train(&train_ds, &cfg)?;
    let model = match record {
        Some(r) => model.with_preprocessing(r)?,
        None => model,
    };

    model.save(&args.out_model)?;
    let trace_path = args
        .out_trace
        .clone()
        .unwrap_or_else(|| sibling_with_suffix(&args.out_model, ".trace.csv"));
    write_trace_csv(&trace.rows, &trace_path)?;

    let mut manifest = RunManifest::new(
        "train",
        args.train_flags.seed,
        serde_json::json!({
            "data": &args.data_flags,
            "train": &args.train_flags,
            "out_model": &args.out_model,
            "out_trace": &trace_path,
        }),
    );
    manifest.record_input(&args.data_flags.data)?;
    manifest.record_output(&args.out_model);
    manifest.record_output(&trace_path);
    manifest.write(&args.out_model, started.elapsed())?;

    let last = trace.rows.last().context("empty training trace")?;
    println!(
        "wrote {} ({} iterations, objective {}, sigma {})",
        args.out_model.display(),
        last.iteration,
        last.objective,
        last.sigma
    );
    Ok(())
}
