use std::process::Command;

fn qcgen() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qcgen"))
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        vec!["--opt", "3", "--dir", d, "generate"],
        vec!["--variant", "lstm", "--dir", d, "generate"],
        vec!["--map", "torus", "--dir", d, "generate"],
    ] {
        let out = qcgen().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "split = [0.5, 0.2]\n").unwrap();
    let out = qcgen()
        .args(["--config", bad.to_str().unwrap(), "--dir", d, "generate"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_then_optimize_without_models() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "qubit_counts = [3]\ngate_counts = [12]\ncircuits_per_size = 10\n").unwrap();
    let d = dir.path().to_str().unwrap();
    let out = qcgen()
        .args(["--config", cfg.to_str().unwrap(), "--dir", d, "generate"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let file = dir.path().join("data/q3_g12/c0000.qc");
    assert!(file.is_file());

    // No checkpoints: every block is kept, so the circuit comes back as is.
    let out = qcgen().args(["optimize", file.to_str().unwrap()]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["source"], v["result"]);
    assert_eq!(v["circuit"].as_str().unwrap(), std::fs::read_to_string(&file).unwrap());

    let out = qcgen()
        .args(["--dir", d, "eval", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
