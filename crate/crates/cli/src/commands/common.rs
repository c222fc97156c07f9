//! Flag groups shared by several commands.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use nsse_core::dataset::{load_csv, LabeledDataset};
use nsse_core::optimizer::TrainConfig;
use serde::Serialize;

use crate::csvio::{parse_label_column, parse_sigma_grid, parse_sigma_init};

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataFlags {
    /// Input CSV file (UTF-8, comma-separated, optional header row).
    #[arg(long)]
    pub data: PathBuf,
    /// Label column: zero-based index or header name.
    #[arg(long, default_value = "0")]
    pub label_col: String,
    /// The CSV has no header row.
    #[arg(long)]
    pub no_header: bool,
}

impl DataFlags {
    pub fn load(&self) -> Result<LabeledDataset> {
        let column = parse_label_column(&self.label_col);
        Ok(load_csv(&self.data, &column, !self.no_header)?)
    }
}

fn default_cfg() -> TrainConfig {
    TrainConfig::default()
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainFlags {
    /// Embedding dimension.
    #[arg(long, default_value_t = default_cfg().dim)]
    pub dim: usize,
    /// Between-class separation weight.
    #[arg(long, default_value_t = default_cfg().mu1)]
    pub mu1: f64,
    /// Interpolator regularity weight.
    #[arg(long, default_value_t = default_cfg().mu2)]
    pub mu2: f64,
    /// Kernel-scale weight.
    #[arg(long, default_value_t = default_cfg().mu3)]
    pub mu3: f64,
    /// Neighbor count for the graph.
    #[arg(long, default_value_t = default_cfg().k)]
    pub k: usize,
    /// Kernel-scale grid: `auto` (percentile rule) or a comma list.
    #[arg(long, default_value = "auto")]
    pub sigma_grid: String,
    /// Initial kernel scale: `auto` (median pairwise distance) or a number.
    #[arg(long, default_value = "auto")]
    pub sigma_init: String,
    #[arg(long, default_value_t = default_cfg().max_iter)]
    pub max_iter: usize,
    /// Relative objective-change stopping tolerance.
    #[arg(long, default_value_t = default_cfg().rel_tol)]
    pub tol: f64,
    /// Ridge added to the kernel matrix before factorization.
    #[arg(long, default_value_t = default_cfg().ridge)]
    pub ridge: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Standardize features first; the record travels inside the model.
    #[arg(long)]
    pub standardize: bool,
}

impl TrainFlags {
    pub fn to_config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            dim: self.dim,
            mu1: self.mu1,
            mu2: self.mu2,
            mu3: self.mu3,
            k: self.k,
            sigma_grid: parse_sigma_grid(&self.sigma_grid)?,
            sigma_init: parse_sigma_init(&self.sigma_init)?,
            max_iter: self.max_iter,
            rel_tol: self.tol,
            ridge: self.ridge,
            seed: self.seed,
        })
    }
}
