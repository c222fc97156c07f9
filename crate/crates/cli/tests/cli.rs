//! End-to-end checks of the `nsse` binary through its public surface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nsse_core::dataset::{synth_blobs, write_csv};
use nsse_core::model::EmbeddingModel;

fn nsse() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nsse"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("failed to launch nsse binary")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn blobs_csv(dir: &Path) -> PathBuf {
    let ds = synth_blobs(3, 12, 4, 0.2, 25.0, 5).unwrap();
    let path = dir.join("blobs.csv");
    write_csv(&ds, &path).unwrap();
    path
}

fn train_model(dir: &Path, data: &Path, extra: &[&str]) -> PathBuf {
    let model = dir.join("model.json");
    let mut cmd = nsse();
    cmd.args(["train", "--data"])
        .arg(data)
        .args(["--dim", "2", "--k", "4", "--seed", "7", "--out-model"])
        .arg(&model)
        .args(extra);
    let out = run(&mut cmd);
    assert!(out.status.success(), "train failed: {}", stderr(&out));
    model
}

#[test]
fn train_writes_model_trace_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs_csv(dir.path());
    let model = train_model(dir.path(), &data, &[]);
    assert!(model.exists());
    assert!(dir.path().join("model.json.manifest.json").exists());

    let trace = std::fs::read_to_string(dir.path().join("model.trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iter,objective,sigma,term_lw,term_lb,term_psi,term_sigma"
    );
    let objectives: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(!objectives.is_empty(), "trace must have at least one row");
    for w in objectives.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "objective column must be non-increasing");
    }
}

#[test]
fn train_rejects_oversized_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs_csv(dir.path());
    let out = run(nsse()
        .args(["train", "--data"])
        .arg(&data)
        .args(["--dim", "1000", "--out-model"])
        .arg(dir.path().join("m.json")));
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error:"), "stderr was: {err}");
    assert!(err.contains("exceeds the number of training samples"), "stderr was: {err}");
    assert_eq!(err.trim_end().lines().count(), 1, "error must be a single line");
}

#[test]
fn train_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs_csv(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    std::fs::create_dir_all(&a).unwrap();
    std::fs::create_dir_all(&b).unwrap();
    let model_a = train_model(&a, &data, &[]);
    let model_b = train_model(&b, &data, &[]);
    assert_eq!(std::fs::read(model_a).unwrap(), std::fs::read(model_b).unwrap());
    assert_eq!(
        std::fs::read(a.join("model.trace.csv")).unwrap(),
        std::fs::read(b.join("model.trace.csv")).unwrap()
    );
}

#[test]
fn classify_training_file_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs_csv(dir.path());
    let model = train_model(dir.path(), &data, &["--ridge", "0"]);
    let report = dir.path().join("report.csv");
    let out = run(nsse()
        .args(["classify", "--model"])
        .arg(&model)
        .args(["--data"])
        .arg(&data)
        .args(["--out-report"])
        .arg(&report));
    assert!(out.status.success(), "classify failed: {}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "0.00");

    let text = std::fs::read_to_string(&report).unwrap();
    let data_rows = text.trim_end().lines().count() - 1;
    assert_eq!(data_rows, 3 + 1, "one row per class plus the summary row");
}

#[test]
fn classify_missing_model_fails() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs_csv(dir.path());
    let out = run(nsse()
        .args(["classify", "--model"])
        .arg(dir.path().join("nope.json"))
        .args(["--data"])
        .arg(&data));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn embed_anchors_reproduces_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs_csv(dir.path());
    let model_path = train_model(dir.path(), &data, &["--ridge", "0"]);
    let out_path = dir.path().join("embedded.csv");
    let out = run(nsse()
        .args(["embed", "--model"])
        .arg(&model_path)
        .args(["--data"])
        .arg(&data)
        .args(["--label-col", "0", "--out"])
        .arg(&out_path));
    assert!(out.status.success(), "embed failed: {}", stderr(&out));

    let model = EmbeddingModel::load(&model_path).unwrap();
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.trim_end().lines();
    assert_eq!(lines.next().unwrap(), "y0,y1,label");
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), model.embed_dim() + 1);
        for k in 0..model.embed_dim() {
            let v: f64 = cells[k].parse().unwrap();
            assert!(
                (v - model.embedding()[(i, k)]).abs() <= 1e-6,
                "row {i} column {k}: {v} vs {}",
                model.embedding()[(i, k)]
            );
        }
    }
}

#[test]
fn embed_empty_input_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs_csv(dir.path());
    let model = train_model(dir.path(), &data, &[]);

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "x0,x1,x2,x3\n").unwrap();
    let out_path = dir.path().join("embedded.csv");
    let out = run(nsse()
        .args(["embed", "--model"])
        .arg(&model)
        .args(["--data"])
        .arg(&empty)
        .args(["--out"])
        .arg(&out_path));
    assert!(out.status.success(), "embed failed: {}", stderr(&out));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(text, "y0,y1\n");
}

#[test]
fn cv_singleton_grids_echo_and_write_flags() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs_csv(dir.path());
    let flags = dir.path().join("picked.flags");
    let out = run(nsse()
        .args(["cv", "--data"])
        .arg(&data)
        .args([
            "--dim", "2", "--k", "3", "--folds", "2", "--mu1-grid", "250", "--mu2-grid",
            "0.0005", "--mu3-grid", "2", "--out-flags",
        ])
        .arg(&flags));
    assert!(out.status.success(), "cv failed: {}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "selected: --mu1 250 --mu2 0.0005 --mu3 2");
    let written = std::fs::read_to_string(&flags).unwrap();
    assert_eq!(written, "--mu1 250 --mu2 0.0005 --mu3 2\n");
}

#[test]
fn cv_default_grids_lie_in_documented_ranges() {
    let out = run(nsse().args(["cv", "--help"]));
    assert!(out.status.success());
    let help = stdout(&out);

    let extract = |flag: &str| -> Vec<f64> {
        let idx = help.find(flag).unwrap_or_else(|| panic!("{flag} missing from help"));
        let rest = &help[idx..];
        let start = rest.find("[default: ").expect("default value shown") + "[default: ".len();
        let end = rest[start..].find(']').unwrap() + start;
        rest[start..end]
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|v| !v.is_empty())
            .map(|v| v.parse().unwrap())
            .collect()
    };

    for v in extract("--mu1-grid") {
        assert!((100.0..=1000.0).contains(&v), "mu1 default {v} outside [100, 1000]");
    }
    for v in extract("--mu2-grid") {
        assert!((0.0001..=0.001).contains(&v), "mu2 default {v} outside [0.0001, 0.001]");
    }
    for v in extract("--mu3-grid") {
        assert!((1.0..=5.0).contains(&v), "mu3 default {v} outside [1, 5]");
    }
}

#[test]
fn diagnose_prints_consistent_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs_csv(dir.path());
    let model = train_model(dir.path(), &data, &[]);
    let json_out = dir.path().join("diag.json");
    let out = run(nsse()
        .args(["diagnose", "--model"])
        .arg(&model)
        .args(["--delta", "0.5", "--epsilon", "0.01", "--out"])
        .arg(&json_out));
    assert!(out.status.success(), "diagnose failed: {}", stderr(&out));
    assert!(stdout(&out).contains("slack"));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_out).unwrap()).unwrap();
    let gamma = report["gamma"].as_f64().unwrap();
    let lhs = report["lhs"].as_f64().unwrap();
    let slack = report["slack"].as_f64().unwrap();
    assert!((slack - (gamma / 2.0 - lhs)).abs() <= 1e-12);

    // A required condition parameter cannot be defaulted.
    let out = run(nsse().args(["diagnose", "--model"]).arg(&model).args(["--epsilon", "0.01"]));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn benchmark_single_seed_rows_and_summary_means() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs_csv(dir.path());
    let long = dir.path().join("bench.csv");
    let out = run(nsse()
        .args(["benchmark", "--data"])
        .arg(&data)
        .args([
            "--per-class-train",
            "3,5",
            "--seeds",
            "2",
            "--methods",
            "nn,nsse",
            "--dim",
            "2",
            "--k",
            "2",
            "--out-csv",
        ])
        .arg(&long));
    assert!(out.status.success(), "benchmark failed: {}", stderr(&out));

    let text = std::fs::read_to_string(&long).unwrap();
    let mut lines = text.trim_end().lines();
    assert_eq!(lines.next().unwrap(), "method,per_class_train,seed,dim,error_rate,wall_ms");
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), 2 * 2 * 2, "methods x sizes x seeds");

    // Recompute every summary mean from the long rows.
    let summary = std::fs::read_to_string(dir.path().join("bench.summary.csv")).unwrap();
    let mut summary_lines = summary.trim_end().lines();
    let header: Vec<&str> = summary_lines.next().unwrap().split(',').collect();
    assert_eq!(header, vec!["per_class_train", "nn", "nsse"]);
    for line in summary_lines {
        let cells: Vec<&str> = line.split(',').collect();
        let size = cells[0];
        for (col, method) in header.iter().enumerate().skip(1) {
            let shown_mean: f64 = cells[col].split('±').next().unwrap().parse().unwrap();
            let matching: Vec<f64> = rows
                .iter()
                .filter(|r| r[0] == *method && r[1] == size)
                .map(|r| r[4].parse::<f64>().unwrap())
                .collect();
            let mean = 100.0 * matching.iter().sum::<f64>() / matching.len() as f64;
            assert!(
                (shown_mean - mean).abs() <= 0.005 + 1e-9,
                "summary mean {shown_mean} vs recomputed {mean}"
            );
        }
    }
}

#[test]
fn benchmark_warns_and_skips_infeasible_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let data = blobs_csv(dir.path());
    let long = dir.path().join("bench.csv");
    let out = run(nsse()
        .args(["benchmark", "--data"])
        .arg(&data)
        .args([
            "--per-class-train",
            "3,500",
            "--seeds",
            "1",
            "--methods",
            "nn",
            "--out-csv",
        ])
        .arg(&long));
    assert!(out.status.success(), "benchmark failed: {}", stderr(&out));
    assert!(stderr(&out).contains("infeasible"));
    let text = std::fs::read_to_string(&long).unwrap();
    assert!(!text.contains("500,"), "infeasible size must not produce rows");
}
