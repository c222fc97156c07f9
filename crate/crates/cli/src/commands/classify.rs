use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use nsse_core::classify::evaluate;
use nsse_core::model::EmbeddingModel;

use super::common::DataFlags;
use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data_flags: DataFlags,
    /// Where to write the per-class report CSV.
    #[arg(long)]
    pub out_report: Option<PathBuf>,
}

pub fn run(args: ClassifyArgs) -> Result<()> {
    let started = Instant::now();
    let model = EmbeddingModel::load(&args.model)?;
    let test = args.data_flags.load()?;
    let report = evaluate(&model, &test)?;

    // Misclassification rate in percent, two decimals.
    println!("{:.2}", report.error_percent());

    if let Some(path) = &args.out_report {
        std::fs::write(path, report.to_csv_string())?;
        let mut manifest = RunManifest::new(
            "classify",
            0,
            serde_json::json!({
                "model": &args.model,
                "data": &args.data_flags,
                "out_report": path,
            }),
        );
        manifest.record_input(&args.model)?;
        manifest.record_input(&args.data_flags.data)?;
        manifest.record_output(path);
        manifest.write(path, started.elapsed())?;
    }
    Ok(())
}
