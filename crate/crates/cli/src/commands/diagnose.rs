use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::Args;
use nsse_core::diagnostics::diagnose;
use nsse_core::model::EmbeddingModel;

use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Ambient neighborhood radius of the condition.
    #[arg(long)]
    pub delta: f64,
    /// Interpolation accuracy parameter of the condition.
    #[arg(long)]
    pub epsilon: f64,
    /// Optionally write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: DiagnoseArgs) -> Result<()> {
    let started = Instant::now();
    let model = EmbeddingModel::load(&args.model)?;
    let report = diagnose(&model, args.delta, args.epsilon)?;
    println!("{report}");

    if let Some(path) = &args.out {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        std::fs::write(path, text)?;
        let mut manifest = RunManifest::new(
            "diagnose",
            0,
            serde_json::json!({
                "model": &args.model,
                "delta": args.delta,
                "epsilon": args.epsilon,
                "out": path,
            }),
        );
        manifest.record_input(&args.model)?;
        manifest.record_output(path);
        manifest.write(path, started.elapsed())?;
    }
    Ok(())
}
