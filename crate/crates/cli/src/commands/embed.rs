use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::Args;
use nsse_core::model::EmbeddingModel;

use crate::csvio::{load_feature_table, parse_label_column};
use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// CSV of points to embed (features only, unless `--label-col` names a
    /// column to pass through).
    #[arg(long)]
    pub data: PathBuf,
    /// Optional label column to exclude from the features and append,
    /// verbatim, to the output.
    #[arg(long)]
    pub label_col: Option<String>,
    /// The CSV has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Where to write the embedded coordinates CSV.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: EmbedArgs) -> Result<()> {
    let started = Instant::now();
    let model = EmbeddingModel::load(&args.model)?;
    let column = args.label_col.as_deref().map(parse_label_column);
    let table = load_feature_table(&args.data, column.as_ref(), !args.no_header)?;
    if table.features.nrows() > 0 && table.features.ncols() != model.ambient_dim() {
        bail!(
            "{} has {} feature columns, model expects {}",
            args.data.display(),
            table.features.ncols(),
            model.ambient_dim()
        );
    }
    let embedded = model.embed_batch(&table.features)?;

    let mut out = String::new();
    for k in 0..model.embed_dim() {
        if k > 0 {
            out.push(',');
        }
        write!(out, "y{k}")?;
    }
    if table.labels.is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for i in 0..embedded.nrows() {
        for k in 0..embedded.ncols() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{}", embedded[(i, k)])?;
        }
        if let Some(labels) = &table.labels {
            write!(out, ",{}", labels[i])?;
        }
        out.push('\n');
    }
    std::fs::write(&args.out, out)?;

    let mut manifest = RunManifest::new(
        "embed",
        0,
        serde_json::json!({
            "model": &args.model,
            "data": &args.data,
            "label_col": &args.label_col,
            "no_header": args.no_header,
            "out": &args.out,
        }),
    );
    manifest.record_input(&args.model)?;
    manifest.record_input(&args.data)?;
    manifest.record_output(&args.out);
    manifest.write(&args.out, started.elapsed())?;
    Ok(())
}
