//! CSV plumbing shared by the commands: shared flag types, a feature-matrix
//! loader that tolerates zero data rows (for embedding empty files), and the
//! writers for traces and reports.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use nsse_core::dataset::LabelColumn;
use nsse_core::optimizer::{SigmaGrid, TraceRow};
use nsse_core::DMatrix;

/// Parse `--label-col` as an index when numeric, else as a header name.
pub fn parse_label_column(raw: &str) -> LabelColumn {
    match raw.trim().parse::<usize>() {
        Ok(i) => LabelColumn::Index(i),
        Err(_) => LabelColumn::Name(raw.trim().to_owned()),
    }
}

/// Parse `--sigma-grid`: `auto` or a comma-separated ascending list.
pub fn parse_sigma_grid(raw: &str) -> Result<SigmaGrid> {
    if raw.trim().eq_ignore_ascii_case("auto") {
        return Ok(SigmaGrid::Auto);
    }
    let values: Vec<f64> = raw
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid sigma grid entry {s:?}"))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        bail!("sigma grid must be nonempty");
    }
    Ok(SigmaGrid::Explicit(values))
}

/// Parse `--sigma-init`: `auto` (data-driven) or a positive number.
pub fn parse_sigma_init(raw: &str) -> Result<Option<f64>> {
    if raw.trim().eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    let v: f64 = raw.trim().parse().with_context(|| format!("invalid sigma init {raw:?}"))?;
    Ok(Some(v))
}

/// A feature matrix read from CSV, with the optional label column carried
/// through verbatim.
pub struct FeatureTable {
    pub features: DMatrix<f64>,
    /// Raw label cells, one per row, when a label column was named.
    pub labels: Option<Vec<String>>,
}

/// Read a CSV as a plain feature matrix. Unlike the labeled loader this
/// accepts zero data rows (the column count then comes from the header).
pub fn load_feature_table(
    path: &Path,
    label_column: Option<&LabelColumn>,
    has_header: bool,
) -> Result<FeatureTable> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(false)
        .from_reader(file);

    let headers: Option<Vec<String>> = if has_header {
        Some(reader.headers()?.iter().map(str::to_owned).collect())
    } else {
        None
    };

    let resolve_label = |ncols: usize| -> Result<Option<usize>> {
        match label_column {
            None => Ok(None),
            Some(LabelColumn::Index(i)) => {
                if *i >= ncols {
                    bail!("label column index {i} out of range for {ncols} columns");
                }
                Ok(Some(*i))
            }
            Some(LabelColumn::Name(name)) => {
                let headers = headers
                    .as_ref()
                    .with_context(|| format!("label column {name:?} needs a header row"))?;
                Ok(Some(headers.iter().position(|h| h == name).with_context(|| {
                    format!("label column {name:?} not found in header")
                })?))
            }
        }
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut label_idx: Option<usize> = None;
    let mut n_features: Option<usize> = None;

    for (row_i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: row {}", path.display(), row_i + 1))?;
        if row_i == 0 {
            label_idx = resolve_label(record.len())?;
            n_features = Some(record.len() - label_idx.map_or(0, |_| 1));
        }
        let mut features = Vec::with_capacity(n_features.unwrap());
        for (col_i, cell) in record.iter().enumerate() {
            if Some(col_i) == label_idx {
                labels.push(cell.to_owned());
                continue;
            }
            let value: f64 = cell.trim().parse().with_context(|| {
                format!(
                    "{}: non-numeric feature cell {:?} at row {}, column {}",
                    path.display(),
                    cell,
                    row_i + 1,
                    col_i + 1
                )
            })?;
            features.push(value);
        }
        rows.push(features);
    }

    let n_features = match n_features {
        Some(n) => n,
        None => {
            // No data rows: derive the width from the header if we have one.
            let headers = headers
                .as_ref()
                .context("empty file without a header row; cannot infer the column count")?;
            label_idx = resolve_label(headers.len())?;
            headers.len() - label_idx.map_or(0, |_| 1)
        }
    };

    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(FeatureTable {
        features: DMatrix::from_row_slice(rows.len(), n_features, &flat),
        labels: label_column.map(|_| labels),
    })
}

/// Trace CSV: `iter,objective,sigma,term_lw,term_lb,term_psi,term_sigma`.
pub fn write_trace_csv(rows: &[TraceRow], path: &Path) -> Result<()> {
    let mut out = String::from("iter,objective,sigma,term_lw,term_lb,term_psi,term_sigma\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.iteration, r.objective, r.sigma, r.term_lw, r.term_lb, r.term_psi, r.term_sigma
        ));
    }
    std::fs::write(path, out).with_context(|| format!("writing trace {}", path.display()))
}

/// Derive a sibling path like `model.json` -> `model.trace.csv`.
pub fn sibling_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
    path.with_file_name(format!("{stem}{suffix}"))
}
