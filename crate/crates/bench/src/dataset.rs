//! Random circuit datasets on disk: one text file per circuit and a fixed
//! train/test split per (qubits, gates) size.

use crate::config::ExperimentConfig;
use crate::{derive_seed, BenchError};
use qcgen_core::{random_circuit, QuantumCircuit};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SizeData {
    pub qubits: usize,
    pub gates: usize,
    pub train: Vec<(usize, QuantumCircuit)>,
    pub test: Vec<(usize, QuantumCircuit)>,
}

impl SizeData {
    pub fn train_circuits(&self) -> Vec<QuantumCircuit> {
        self.train.iter().map(|(_, c)| c.clone()).collect()
    }

    pub fn test_circuits(&self) -> Vec<QuantumCircuit> {
        self.test.iter().map(|(_, c)| c.clone()).collect()
    }
}

pub fn size_dir(root: &Path, qubits: usize, gates: usize) -> PathBuf {
    root.join("data").join(format!("q{qubits}_g{gates}"))
}

fn circuit_path(dir: &Path, id: usize) -> PathBuf {
    dir.join(format!("c{id:04}.qc"))
}

pub fn circuit_seed(base: u64, qubits: usize, gates: usize, id: usize) -> u64 {
    derive_seed(base, &[1, qubits as u64, gates as u64, id as u64])
}

/// Writes every circuit and split manifest; returns the number of circuit files.
pub fn generate(cfg: &ExperimentConfig, root: &Path) -> Result<usize, BenchError> {
    cfg.validate()?;
    let (n_train, _) = cfg.split_counts();
    let mut files = 0;
    for &q in &cfg.qubit_counts {
        for &g in &cfg.gate_counts {
            let dir = size_dir(root, q, g);
            fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
            for id in 0..cfg.circuits_per_size {
                let c = random_circuit(q, g, circuit_seed(cfg.seed, q, g, id));
                let path = circuit_path(&dir, id);
                fs::write(&path, c.to_text()).map_err(|e| BenchError::io(&path, e))?;
                files += 1;
            }
            let mut ids: Vec<usize> = (0..cfg.circuits_per_size).collect();
            ids.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[2, q as u64, g as u64])));
            let (tr, te) = ids.split_at(n_train);
            let mut split = Split {
                train: tr.to_vec(),
                test: te.to_vec(),
            };
            split.train.sort_unstable();
            split.test.sort_unstable();
            let path = dir.join("split.json");
            let text = serde_json::to_string_pretty(&split)?;
            fs::write(&path, text).map_err(|e| BenchError::io(&path, e))?;
        }
    }
    Ok(files)
}

pub fn read_circuit(path: &Path) -> Result<QuantumCircuit, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    QuantumCircuit::from_text(&text).map_err(|e| BenchError::Validation(format!("{}: {e}", path.display())))
}

pub fn load_size(root: &Path, qubits: usize, gates: usize) -> Result<SizeData, BenchError> {
    let dir = size_dir(root, qubits, gates);
    let path = dir.join("split.json");
    let text = fs::read_to_string(&path).map_err(|e| BenchError::io(&path, e))?;
    let split: Split = serde_json::from_str(&text)?;
    let load = |ids: &[usize]| -> Result<Vec<(usize, QuantumCircuit)>, BenchError> {
        ids.iter()
            .map(|&id| Ok((id, read_circuit(&circuit_path(&dir, id))?)))
            .collect()
    };
    Ok(SizeData {
        qubits,
        gates,
        train: load(&split.train)?,
        test: load(&split.test)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            qubit_counts: vec![2, 3],
            gate_counts: vec![4],
            circuits_per_size: 10,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn generation_is_reproducible_and_split_is_disjoint() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert_eq!(generate(&tiny(), a.path()).unwrap(), 20);
        generate(&tiny(), b.path()).unwrap();
        for q in [2, 3] {
            let da = size_dir(a.path(), q, 4);
            for entry in fs::read_dir(&da).unwrap() {
                let p = entry.unwrap().path();
                let other = size_dir(b.path(), q, 4).join(p.file_name().unwrap());
                assert_eq!(fs::read(&p).unwrap(), fs::read(other).unwrap());
            }
            let d = load_size(a.path(), q, 4).unwrap();
            assert_eq!((d.train.len(), d.test.len()), (9, 1));
            assert!(d.train.iter().all(|(id, _)| d.test.iter().all(|(t, _)| t != id)));
            assert!(d.train.iter().all(|(_, c)| c.num_qubits() == q && c.len() == 4));
        }
    }
}
