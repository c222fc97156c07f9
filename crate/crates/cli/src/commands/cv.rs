use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use nsse_core::dataset::standardize;
use nsse_core::optimizer::{cross_validate, CvGrids};

use super::common::{DataFlags, TrainFlags};
use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub data_flags: DataFlags,
    #[command(flatten)]
    pub train_flags: TrainFlags,
    /// Validation splits per candidate value.
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Candidates for the separation weight.
    #[arg(long, value_delimiter = ',', default_values_t = CvGrids::default().mu1)]
    pub mu1_grid: Vec<f64>,
    /// Candidates for the regularity weight.
    #[arg(long, value_delimiter = ',', default_values_t = CvGrids::default().mu2)]
    pub mu2_grid: Vec<f64>,
    /// Candidates for the kernel-scale weight.
    #[arg(long, value_delimiter = ',', default_values_t = CvGrids::default().mu3)]
    pub mu3_grid: Vec<f64>,
    /// Where to write the selected weights as reusable flags.
    #[arg(long, default_value = "nsse-cv.flags")]
    pub out_flags: PathBuf,
}

pub fn run(args: CvArgs) -> Result<()> {
    let started = Instant::now();
    let ds = args.data_flags.load()?;
    let ds = if args.train_flags.standardize {
        standardize(&ds)?.0
    } else {
        ds
    };
    let base = args.train_flags.to_config()?;
    let grids = CvGrids {
        mu1: args.mu1_grid.clone(),
        mu2: args.mu2_grid.clone(),
        mu3: args.mu3_grid.clone(),
    };
    let chosen = cross_validate(&ds, &base, &grids, args.folds, args.train_flags.seed)?;

    println!("selected: --mu1 {} --mu2 {} --mu3 {}", chosen.mu1, chosen.mu2, chosen.mu3);
    let flags_line = format!("--mu1 {} --mu2 {} --mu3 {}\n", chosen.mu1, chosen.mu2, chosen.mu3);
    std::fs::write(&args.out_flags, flags_line)?;

    let mut manifest = RunManifest::new(
        "cv",
        args.train_flags.seed,
        serde_json::json!({
            "data": &args.data_flags,
            "train": &args.train_flags,
            "folds": args.folds,
            "mu1_grid": &args.mu1_grid,
            "mu2_grid": &args.mu2_grid,
            "mu3_grid": &args.mu3_grid,
            "out_flags": &args.out_flags,
        }),
    );
    manifest.record_input(&args.data_flags.data)?;
    manifest.record_output(&args.out_flags);
    manifest.write(&args.out_flags, started.elapsed())?;
    Ok(())
}
