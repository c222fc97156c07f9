//! Acceptance suite: one test per release criterion, each printing a
//! `[PASS]`/`[SKIP]` line (run with `--nocapture` to see them).
//!
//! Criterion 10 (byte-identical CLI outputs across runs and thread counts)
//! lives in the CLI crate's acceptance suite, next to the binary it checks.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use nsse_core::classify::{ambient_nn, evaluate, train_suplap};
use nsse_core::dataset::{load_csv, split, synth_blobs, synth_moons, LabelColumn, SplitSpec};
use nsse_core::diagnostics::diagnose;
use nsse_core::kernel::KernelSystem;
use nsse_core::model::{EmbeddingModel, Hyperparams};
use nsse_core::numerics::{symmetric_eigen, SymMatrix};
use nsse_core::optimizer::{auto_sigma_grid, cross_validate, train, CvGrids, SigmaGrid, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_orthonormal(n: usize, d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
    raw.qr().q().columns(0, d).into_owned()
}

/// Criterion 1: training on well-separated blobs with the ridge-free path
/// reproduces the embedding at every anchor to 1e-6, in under five seconds.
#[test]
fn criterion_01_interpolation_exactness() {
    let started = Instant::now();
    let ds = synth_blobs(3, 20, 10, 0.1, 100.0, 42).unwrap();
    let cfg = TrainConfig {
        dim: 2,
        k: 5,
        ridge: 0.0,
        ..TrainConfig::default()
    };
    let (model, _) = train(&ds, &cfg).unwrap();
    assert_eq!(model.ridge(), 0.0, "ridge-free path must succeed on this data");
    let mut worst = 0.0f64;
    for i in 0..model.num_anchors() {
        let f = model.embed_point(&model.anchors().row(i).transpose()).unwrap();
        worst = worst.max((f - model.embedding().row(i).transpose()).norm());
    }
    assert!(worst <= 1e-6, "max interpolation error {worst}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("[PASS] criterion 1: interpolation exactness (max error {worst:.2e}, {elapsed:?})");
}

/// Criterion 2: the certified Lipschitz bound holds empirically for five
/// trained models across scales and seeds, 10^4 random pairs each.
#[test]
fn criterion_02_lipschitz_bound() {
    let started = Instant::now();
    let datasets = [
        synth_blobs(3, 15, 4, 0.5, 8.0, 1).unwrap(),
        synth_blobs(4, 12, 6, 1.0, 5.0, 2).unwrap(),
        synth_moons(30, 0.1, 3).unwrap(),
        synth_moons(25, 0.2, 4).unwrap(),
        synth_blobs(2, 20, 3, 0.3, 20.0, 5).unwrap(),
    ];
    for (idx, ds) in datasets.iter().enumerate() {
        let cfg = TrainConfig {
            dim: 2,
            k: 4,
            ..TrainConfig::default()
        };
        let (model, _) = train(ds, &cfg).unwrap();
        // The bound must be exactly the advertised formula.
        let formula = (model.num_anchors() as f64).sqrt()
            * (2.0f64.sqrt() * (-0.5f64).exp() / model.sigma())
            * model.coefficients().norm();
        let bound = model.lipschitz_bound();
        assert!(
            (bound - formula).abs() <= 1e-12 * formula.abs().max(1.0),
            "bound {bound} differs from formula {formula}"
        );

        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in model.anchors().iter() {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        let dims = model.ambient_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + idx as u64);
        for _ in 0..10_000 {
            let u = DVector::from_fn(dims, |_, _| rng.random_range(lo..hi));
            let v = DVector::from_fn(dims, |_, _| rng.random_range(lo..hi));
            let fu = model.embed_point(&u).unwrap();
            let fv = model.embed_point(&v).unwrap();
            let lhs = (fu - fv).norm();
            let rhs = bound * (&u - &v).norm() * (1.0 + 1e-9);
            assert!(lhs <= rhs, "model {idx}: |f(u)-f(v)| = {lhs} exceeds {rhs}");
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("[PASS] criterion 2: Lipschitz bound holds on 5 models x 10^4 pairs ({elapsed:?})");
}

/// Criterion 3: `||C||_F^2 = tr(Y' Psi^-2 Y)` against an explicit
/// small-matrix inverse, 1e-8 relative, 20 random instances.
#[test]
fn criterion_03_coefficient_norm_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for trial in 0..20 {
        let n = rng.random_range(2..=15usize);
        let dims = rng.random_range(1..=4usize);
        let d = rng.random_range(1..=3usize.min(n));
        let anchors = DMatrix::from_fn(n, dims, |_, _| rng.random_range(-2.0..2.0));
        let sigma = rng.random_range(0.5..2.0);
        let system = KernelSystem::new(&anchors, sigma, 1e-8).unwrap();
        let y = DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));

        let coefficients = system.solve(&y).unwrap();
        let c_norm_sq = coefficients.norm_squared();

        // Oracle: explicit inverse through LU, an independent path.
        let mut m = system.psi().as_matrix().clone();
        for i in 0..n {
            m[(i, i)] += system.ridge();
        }
        let inv = m.try_inverse().unwrap();
        let oracle = (y.transpose() * (&inv * &inv) * &y).trace();

        let scale = c_norm_sq.abs().max(oracle.abs()).max(1e-30);
        assert!(
            (c_norm_sq - oracle).abs() / scale <= 1e-8,
            "trial {trial}: ||C||^2 = {c_norm_sq} vs explicit {oracle}"
        );
    }
    println!("[PASS] criterion 3: coefficient-norm identity on 20 random instances");
}

/// Criterion 4: the recorded objective never increases (1e-9 slack) from
/// either end of the scale grid, and the two runs land within 5% of each
/// other.
#[test]
fn criterion_04_monotone_descent_both_initializations() {
    let started = Instant::now();
    let ds = synth_moons(100, 0.1, 7).unwrap();
    let grid = auto_sigma_grid(ds.features()).unwrap();
    let mut finals = Vec::new();
    for &init in &[grid[0], *grid.last().unwrap()] {
        let cfg = TrainConfig {
            dim: 2,
            k: 5,
            sigma_grid: SigmaGrid::Explicit(grid.clone()),
            sigma_init: Some(init),
            ..TrainConfig::default()
        };
        let (_, trace) = train(&ds, &cfg).unwrap();
        assert!(!trace.rows.is_empty());
        for w in trace.rows.windows(2) {
            assert!(
                w[1].objective <= w[0].objective + 1e-9,
                "init {init}: objective rose {} -> {}",
                w[0].objective,
                w[1].objective
            );
        }
        finals.push(trace.final_objective().unwrap());
    }
    let spread = (finals[0] - finals[1]).abs();
    let allowed = 0.05 * finals[0].abs().max(finals[1].abs());
    assert!(
        spread <= allowed,
        "final objectives {} and {} differ by more than 5%",
        finals[0],
        finals[1]
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 4: monotone descent, finals {:.6e} / {:.6e} within 5% ({elapsed:?})",
        finals[0], finals[1]
    );
}

/// Criterion 5: the eigensolution minimizes the trace form against 100
/// random orthonormal competitors, for 10 random operators.
#[test]
fn criterion_05_eigensolution_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for trial in 0..10 {
        let n = rng.random_range(5..=40usize);
        let d = rng.random_range(1..=(n / 2).max(1));
        let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let a = SymMatrix::symmetrize(raw);
        let eig = symmetric_eigen(&a, d).unwrap();
        let achieved = (a.as_matrix() * &eig.vectors).dot(&eig.vectors);
        for _ in 0..100 {
            let v = random_orthonormal(n, d, &mut rng);
            let competitor = (a.as_matrix() * &v).dot(&v);
            assert!(
                achieved <= competitor,
                "trial {trial}: solver trace {achieved} beaten by random competitor {competitor}"
            );
        }
    }
    println!("[PASS] criterion 5: eigensolution optimality on 10 operators x 100 competitors");
}

/// Criterion 6: trivially separable blobs classify with exactly zero test
/// error across 20 split seeds.
#[test]
fn criterion_06_separable_end_to_end() {
    let ds = synth_blobs(3, 20, 10, 0.1, 100.0, 99).unwrap();
    for seed in 0..20 {
        let (tr, te) = split(&ds, &SplitSpec { per_class_train: 5, seed }).unwrap();
        let cfg = TrainConfig {
            dim: 2,
            k: 5,
            ..TrainConfig::default()
        };
        let (model, _) = train(&tr, &cfg).unwrap();
        let report = evaluate(&model, &te).unwrap();
        assert_eq!(report.error_rate, 0.0, "seed {seed}: error {}", report.error_rate);
    }
    println!("[PASS] criterion 6: zero test error on separable blobs over 20 seeds");
}

/// Criterion 7: on noisy two-moons the joint method keeps pace with the
/// supervised-Laplacian-plus-RBF baseline and ambient nearest neighbor, to
/// within two percentage points of mean error over 20 seeds.
///
/// The objective weights are part of the fixture: they depend on the data
/// scale (the typical image-data ranges sit two orders of magnitude away for
/// unit-scale moons), so this fixture pins `mu1 = 10, mu2 = 0.1, mu3 = 1` the
/// way per-dataset tuning would. Measured means from the frozen oracle run
/// (20 seeds, noise 0.15, 30 train / 200 test per class):
/// nsse 2.39%, suplap 4.20%, ambient nn 2.36%. The committed assertion is
/// the ordering with the stated slack, not those absolute values.
#[test]
fn criterion_07_baseline_ordering() {
    let started = Instant::now();
    let seeds: Vec<u64> = (0..20).collect();
    let mut nsse_total = 0.0;
    let mut suplap_total = 0.0;
    let mut nn_total = 0.0;
    for &seed in &seeds {
        let ds = synth_moons(230, 0.15, 1000 + seed).unwrap();
        let (tr, te) = split(&ds, &SplitSpec { per_class_train: 30, seed }).unwrap();
        assert_eq!(te.num_samples(), 400);

        let cfg = TrainConfig {
            dim: 2,
            k: 5,
            mu1: 10.0,
            mu2: 0.1,
            mu3: 1.0,
            ..TrainConfig::default()
        };
        let (model, _) = train(&tr, &cfg).unwrap();
        nsse_total += evaluate(&model, &te).unwrap().error_rate;

        let grid = auto_sigma_grid(tr.features()).unwrap();
        let suplap = train_suplap(&tr, 2, cfg.mu1, 5, &grid, cfg.ridge).unwrap();
        suplap_total += evaluate(&suplap, &te).unwrap().error_rate;

        nn_total += ambient_nn(&tr, &te).unwrap().error_rate;
    }
    let n = seeds.len() as f64;
    let (nsse, suplap, nn) = (nsse_total / n, suplap_total / n, nn_total / n);
    assert!(
        nsse <= suplap + 0.02,
        "mean NSSE error {nsse:.4} above SUPLAP {suplap:.4} + 2pp"
    );
    assert!(nsse <= nn + 0.02, "mean NSSE error {nsse:.4} above ambient NN {nn:.4} + 2pp");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 7: baseline ordering (means: nsse {:.2}%, suplap {:.2}%, nn {:.2}%; {elapsed:?})",
        100.0 * nsse,
        100.0 * suplap,
        100.0 * nn
    );
}

/// Criterion 8: diagnostics on a hand-built six-point, two-class model match
/// an independent brute-force pairwise scan exactly.
#[test]
fn criterion_08_diagnostics_brute_force() {
    let anchors = DMatrix::from_row_slice(
        6,
        2,
        &[
            0.0, 0.0, //
            0.8, 0.2, //
            0.3, 1.0, //
            5.0, 5.0, //
            5.7, 4.6, //
            4.9, 5.9,
        ],
    );
    let labels = vec![0, 0, 0, 1, 1, 1];
    let embedding = DMatrix::from_row_slice(
        6,
        2,
        &[
            -0.5, 0.1, //
            -0.45, 0.05, //
            -0.55, 0.12, //
            0.5, -0.1, //
            0.48, -0.05, //
            0.52, -0.14,
        ],
    );
    let system = KernelSystem::new(&anchors, 2.0, 0.0).unwrap();
    let coefficients = system.solve(&embedding).unwrap();
    let model = EmbeddingModel::new(
        anchors.clone(),
        embedding.clone(),
        coefficients,
        2.0,
        system.ridge(),
        labels.clone(),
        Hyperparams { mu1: 1.0, mu2: 1.0, mu3: 1.0, k: 2, beta: 1.0 },
        None,
    )
    .unwrap();

    let (delta, epsilon) = (0.8, 0.05);
    let report = diagnose(&model, delta, epsilon).unwrap();

    // Independent scan.
    let mut gamma = f64::INFINITY;
    let mut a_delta = 0.0f64;
    for i in 0..6 {
        for j in (i + 1)..6 {
            let dy = (embedding.row(i) - embedding.row(j)).norm();
            if labels[i] != labels[j] {
                gamma = gamma.min(dy);
            } else if (anchors.row(i) - anchors.row(j)).norm() <= 2.0 * delta {
                a_delta = a_delta.max(dy);
            }
        }
    }
    let lhs = model.lipschitz_bound() * delta + (2.0f64).sqrt() * epsilon + a_delta;
    let slack = gamma / 2.0 - lhs;

    assert_eq!(report.gamma, gamma);
    assert_eq!(report.a_delta, a_delta);
    assert_eq!(report.slack, slack);
    assert_eq!(report.satisfied, slack >= 0.0);
    println!(
        "[PASS] criterion 8: diagnostics match brute force (gamma {gamma:.6}, A_delta {a_delta:.6}, slack {slack:.6})"
    );
}

/// Criterion 9 (optional): COIL-20 reproduction when a flattened CSV is
/// supplied via `NSSE_COIL20_CSV`. Ten training images per class,
/// cross-validated weights, 20 split seeds; the mean error must land within
/// three percentage points of the 4.97% reference. Expect preprocessing
/// variance: the CSV's resizing/scaling is the caller's and is documented in
/// run manifests.
#[test]
fn criterion_09_coil20_reproduction() {
    let Some(path) = std::env::var_os("NSSE_COIL20_CSV") else {
        println!("[SKIP] criterion 9: set NSSE_COIL20_CSV to a flattened COIL-20 CSV to enable");
        return;
    };
    let ds = load_csv(std::path::Path::new(&path), &LabelColumn::Index(0), true).unwrap();
    assert_eq!(ds.num_classes(), 20, "COIL-20 has 20 classes");

    // Cross-validate once on the first split's training half, then reuse the
    // selected weights for every seed, mirroring a fixed-parameter protocol.
    let base = TrainConfig {
        dim: 19,
        k: 5,
        ..TrainConfig::default()
    };
    let (cv_train, _) = split(&ds, &SplitSpec { per_class_train: 10, seed: 0 }).unwrap();
    let tuned = cross_validate(&cv_train, &base, &CvGrids::default(), 5, 0).unwrap();

    let mut total = 0.0;
    for seed in 0..20 {
        let (tr, te) = split(&ds, &SplitSpec { per_class_train: 10, seed }).unwrap();
        let (model, _) = train(&tr, &tuned).unwrap();
        total += evaluate(&model, &te).unwrap().error_rate;
    }
    let mean = total / 20.0;
    let reference = 0.0497;
    assert!(
        (mean - reference).abs() <= 0.03,
        "mean error {:.2}% outside {:.2}% +/- 3pp",
        100.0 * mean,
        100.0 * reference
    );
    println!("[PASS] criterion 9: COIL-20 mean error {:.2}%", 100.0 * mean);
}
