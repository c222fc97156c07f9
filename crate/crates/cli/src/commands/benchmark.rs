use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::Args;
use nsse_core::classify::{ambient_nn, evaluate, train_suplap};
use nsse_core::dataset::{split, standardize, LabeledDataset, SplitSpec};
use nsse_core::optimizer::{auto_sigma_grid, train, SigmaGrid};
use rayon::prelude::*;

use super::common::{DataFlags, TrainFlags};
use crate::csvio::sibling_with_suffix;
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Method {
    Nsse,
    Suplap,
    Nn,
}

impl Method {
    fn parse(raw: &str) -> Result<Method> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "nsse" => Ok(Method::Nsse),
            "suplap" => Ok(Method::Suplap),
            "nn" => Ok(Method::Nn),
            other => bail!("unknown method {other:?}; expected nsse, suplap, or nn"),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Method::Nsse => "nsse",
            Method::Suplap => "suplap",
            Method::Nn => "nn",
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub data_flags: DataFlags,
    #[command(flatten)]
    pub train_flags: TrainFlags,
    /// Training sizes per class to sweep.
    #[arg(long, value_delimiter = ',', required = true)]
    pub per_class_train: Vec<usize>,
    /// Number of split seeds per cell (seed values are `--seed + 0..count`).
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    /// Methods to run.
    #[arg(long, value_delimiter = ',', default_value = "nsse,suplap,nn")]
    pub methods: Vec<String>,
    /// Where to write the long-format results CSV.
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Where to write the mean/std summary CSV
    /// (default: `<out-csv>.summary.csv`).
    #[arg(long)]
    pub out_summary: Option<PathBuf>,
}

struct Row {
    method: &'static str,
    per_class_train: usize,
    seed: u64,
    dim: usize,
    error_rate: f64,
    wall_ms: f64,
}

fn run_cell(
    ds: &LabeledDataset,
    flags: &TrainFlags,
    method: Method,
    per_class_train: usize,
    seed: u64,
) -> Result<Row> {
    let (raw_train, raw_test) = split(ds, &SplitSpec { per_class_train, seed })?;
    let started = Instant::now();
    let (dim, error_rate) = match method {
        Method::Nn => {
            let (train_part, test_part) = if flags.standardize {
                let (std_train, record) = standardize(&raw_train)?;
                let transformed = record.transform_matrix(raw_test.features())?;
                let std_test = LabeledDataset::new(transformed, raw_test.labels().to_vec(), None)?;
                (std_train, std_test)
            } else {
                (raw_train.clone(), raw_test.clone())
            };
            let report = ambient_nn(&train_part, &test_part)?;
            (test_part.num_features(), report.error_rate)
        }
        Method::Nsse => {
            let (train_part, record) = if flags.standardize {
                let (d, r) = standardize(&raw_train)?;
                (d, Some(r))
            } else {
                (raw_train.clone(), None)
            };
            let mut cfg = flags.to_config()?;
            cfg.seed = seed;
            let (model, _) = train(&train_part, &cfg)?;
            let model = match record {
                Some(r) => model.with_preprocessing(r)?,
                None => model,
            };
            let report = evaluate(&model, &raw_test)?;
            (cfg.dim, report.error_rate)
        }
        Method::Suplap => {
            let (train_part, record) = if flags.standardize {
                let (d, r) = standardize(&raw_train)?;
                (d, Some(r))
            } else {
                (raw_train.clone(), None)
            };
            let cfg = flags.to_config()?;
            let grid = match &cfg.sigma_grid {
                SigmaGrid::Auto => auto_sigma_grid(train_part.features())?,
                SigmaGrid::Explicit(g) => g.clone(),
            };
            let model = train_suplap(&train_part, cfg.dim, cfg.mu1, cfg.k, &grid, cfg.ridge)?;
            let model = match record {
                Some(r) => model.with_preprocessing(r)?,
                None => model,
            };
            let report = evaluate(&model, &raw_test)?;
            (cfg.dim, report.error_rate)
        }
    };
    Ok(Row {
        method: method.name(),
        per_class_train,
        seed,
        dim,
        error_rate,
        wall_ms: started.elapsed().as_secs_f64() * 1000.0,
    })
}

pub fn run(args: BenchmarkArgs) -> Result<()> {
    let started = Instant::now();
    if args.seeds == 0 {
        bail!("--seeds must be positive");
    }
    if args.per_class_train.is_empty() {
        bail!("--per-class-train must list at least one size");
    }
    let methods: Vec<Method> = args.methods.iter().map(|m| Method::parse(m)).collect::<Result<_>>()?;
    if methods.is_empty() {
        bail!("--methods must list at least one method");
    }

    let ds = args.data_flags.load()?;
    let min_class = ds.class_counts().into_iter().min().unwrap_or(0);

    let mut sizes = args.per_class_train.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let mut feasible = Vec::new();
    for &size in &sizes {
        if size >= min_class {
            eprintln!(
                "warning: per_class_train = {size} infeasible (smallest class has {min_class} samples); skipped"
            );
        } else {
            feasible.push(size);
        }
    }

    let mut jobs: Vec<(Method, usize, u64)> = Vec::new();
    for &method in &methods {
        for &size in &feasible {
            for s in 0..args.seeds {
                jobs.push((method, size, args.train_flags.seed + s as u64));
            }
        }
    }

    let mut rows: Vec<Row> = jobs
        .par_iter()
        .map(|&(method, size, seed)| run_cell(&ds, &args.train_flags, method, size, seed))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.method
            .cmp(b.method)
            .then(a.per_class_train.cmp(&b.per_class_train))
            .then(a.seed.cmp(&b.seed))
    });

    let mut long = String::from("method,per_class_train,seed,dim,error_rate,wall_ms\n");
    for r in &rows {
        writeln!(
            long,
            "{},{},{},{},{},{}",
            r.method, r.per_class_train, r.seed, r.dim, r.error_rate, r.wall_ms
        )?;
    }
    std::fs::write(&args.out_csv, long)?;

    let summary_path = args
        .out_summary
        .clone()
        .unwrap_or_else(|| sibling_with_suffix(&args.out_csv, ".summary.csv"));
    let summary = summarize(&rows, &methods, &feasible);
    std::fs::write(&summary_path, &summary)?;
    print!("{summary}");

    let mut manifest = RunManifest::new(
        "benchmark",
        args.train_flags.seed,
        serde_json::json!({
            "data": &args.data_flags,
            "train": &args.train_flags,
            "per_class_train": &args.per_class_train,
            "seeds": args.seeds,
            "methods": &args.methods,
            "out_csv": &args.out_csv,
            "out_summary": &summary_path,
        }),
    );
    manifest.record_input(&args.data_flags.data)?;
    manifest.record_output(&args.out_csv);
    manifest.record_output(&summary_path);
    manifest.write(&args.out_csv, started.elapsed())?;
    Ok(())
}

/// Mean and sample standard deviation of the error per (size, method), in
/// percent, laid out one row per training size and one column per method.
fn summarize(rows: &[Row], methods: &[Method], sizes: &[usize]) -> String {
    let mut out = String::from("per_class_train");
    for m in methods {
        out.push(',');
        out.push_str(m.name());
    }
    out.push('\n');
    for &size in sizes {
        out.push_str(&size.to_string());
        for m in methods {
            let errors: Vec<f64> = rows
                .iter()
                .filter(|r| r.per_class_train == size && r.method == m.name())
                .map(|r| r.error_rate)
                .collect();
            if errors.is_empty() {
                out.push_str(",-");
                continue;
            }
            let n = errors.len() as f64;
            let mean = errors.iter().sum::<f64>() / n;
            let std = if errors.len() > 1 {
                (errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            out.push_str(&format!(",{:.2}±{:.2}", 100.0 * mean, 100.0 * std));
        }
        out.push('\n');
    }
    out
}
