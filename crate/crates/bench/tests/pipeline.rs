use qcgen_bench::config::{ExperimentConfig, TrainSettings};
use qcgen_bench::pipeline::{self, StoredCandidate};
use qcgen_bench::{report, BenchError};
use qcgen_core::{circuit_density_mse, random_circuit, GateKind, QuantumCircuit};
use qcgen_models::{ModelConfig, Variant};

fn tiny() -> ExperimentConfig {
    ExperimentConfig {
        qubit_counts: vec![2],
        gate_counts: vec![6],
        circuits_per_size: 10,
        split: [0.8, 0.2],
        runs_per_model: 1,
        variants: vec![Variant::Gru, Variant::Gcn],
        model: ModelConfig::small(8, 4),
        train: TrainSettings {
            epochs: 2,
            batch_size: 4,
            learning_rate: 1e-2,
            beta: 0.005,
        },
        ..ExperimentConfig::default()
    }
}

#[test]
fn eval_before_train_reports_missing_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny();
    pipeline::cmd_generate(&cfg, dir.path()).unwrap();
    assert!(matches!(
        pipeline::cmd_eval(&cfg, dir.path()),
        Err(BenchError::MissingCheckpoint(_))
    ));
}

#[test]
fn full_pipeline_rows_and_recomputable_mse() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let cfg = tiny();
    assert_eq!(pipeline::cmd_generate(&cfg, root).unwrap(), 10);
    let metas = pipeline::cmd_train(&cfg, root).unwrap();
    assert_eq!(metas.len(), 2);
    let rows = pipeline::cmd_eval(&cfg, root).unwrap();
    // 2 test circuits, 9 reconstructions each, per variant.
    assert_eq!(rows.len(), 2 * 2 * 9);
    let base = pipeline::cmd_baseline(&cfg, root).unwrap();
    assert_eq!(base.len(), 2);
    assert!(base.iter().all(|r| r.density_mse < 1e-9));

    for v in [Variant::Gru, Variant::Gcn] {
        let stored: Vec<StoredCandidate> = serde_json::from_str(
            &std::fs::read_to_string(pipeline::candidates_path(root, v, 2, 6, 0)).unwrap(),
        )
        .unwrap();
        let csv_rows = report::read_csv(&pipeline::eval_path(root, v)).unwrap();
        assert_eq!(stored.len(), csv_rows.len());
        for (s, r) in stored.iter().zip(&csv_rows) {
            assert_eq!((s.circuit, s.candidate), (r.circuit, r.candidate));
            let src = qcgen_bench::dataset::read_circuit(
                &qcgen_bench::dataset::size_dir(root, 2, 6).join(format!("c{:04}.qc", s.circuit)),
            )
            .unwrap();
            let cand = QuantumCircuit::from_text(&s.text).unwrap();
            assert!(cand.len() <= 6);
            let mse = circuit_density_mse(&src, &cand).unwrap();
            assert!((mse - r.density_mse).abs() <= 1e-12);
        }
    }

    let written = pipeline::cmd_report(root).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for n in ["summary.csv", "variants.csv", "gru_gate.svg", "gcn_depth.svg", "baseline_gate.svg"] {
        assert!(names.iter().any(|x| x == n), "{n} missing from {names:?}");
    }
    let variants = std::fs::read_to_string(root.join("report/variants.csv")).unwrap();
    assert_eq!(variants.lines().count(), 4);
}

#[test]
fn baseline_cancels_an_adjacent_pair() {
    let mut c = QuantumCircuit::empty(1).unwrap();
    c.push(GateKind::X, &[0]).unwrap();
    c.push(GateKind::X, &[0]).unwrap();
    let (g, d, mse) = pipeline::baseline_row(&c, "line").unwrap();
    assert_eq!((g, d), (100.0, 100.0));
    assert!(mse < 1e-12);
}

#[test]
fn baseline_never_grows_and_helps_on_average() {
    let mut total = 0.0;
    for seed in 0..30 {
        let c = random_circuit(4, 24, 500 + seed);
        let (g, d, mse) = pipeline::baseline_row(&c, "line").unwrap();
        assert!(g >= 0.0, "seed {seed}: gate reduction {g}");
        assert!(d >= 0.0, "seed {seed}: depth reduction {d}");
        assert!(mse < 1e-9);
        total += g;
    }
    assert!(total / 30.0 > 0.0);
}
