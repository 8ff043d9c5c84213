use crate::BenchError;
use qcgen_core::{CouplingMap, OptLevel};
use qcgen_models::{ModelConfig, TrainConfig, Variant, MAX_QUBITS};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Optimizer settings shared by every training run of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let d = TrainConfig::default();
        Self {
            epochs: d.epochs,
            batch_size: d.batch_size,
            learning_rate: d.learning_rate,
            beta: d.beta,
        }
    }
}

impl TrainSettings {
    pub fn to_train_config(&self, variant: Variant, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            beta: self.beta,
            seed,
            model_variant: variant,
            target_val_mse: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub qubit_counts: Vec<usize>,
    /// Total gates per circuit.
    pub gate_counts: Vec<usize>,
    pub circuits_per_size: usize,
    /// Train and test fractions.
    pub split: [f64; 2],
    pub runs_per_model: usize,
    pub variants: Vec<Variant>,
    pub map: String,
    pub opt: u8,
    pub seed: u64,
    pub mse_tol: f64,
    pub noise: f64,
    pub samples: usize,
    pub encodings: usize,
    pub decodings: usize,
    pub out_dir: PathBuf,
    pub model: ModelConfig,
    pub train: TrainSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            qubit_counts: vec![2, 4, 6],
            gate_counts: vec![16, 24, 32],
            circuits_per_size: 300,
            split: [0.9, 0.1],
            runs_per_model: 3,
            variants: Variant::ALL.to_vec(),
            map: "line".into(),
            opt: 1,
            seed: 0,
            mse_tol: 0.01,
            noise: 0.5,
            samples: 100,
            encodings: 3,
            decodings: 3,
            out_dir: PathBuf::from("runs"),
            model: ModelConfig::default(),
            train: TrainSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn opt_level(&self) -> OptLevel {
        OptLevel::from_level(self.opt).expect("validated")
    }

    /// (train, test) circuit counts per size.
    pub fn split_counts(&self) -> (usize, usize) {
        let train = (self.circuits_per_size as f64 * self.split[0]).round() as usize;
        (train, self.circuits_per_size - train)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let fail = |m: String| Err(BenchError::Validation(m));
        if self.qubit_counts.is_empty() || self.gate_counts.is_empty() || self.variants.is_empty() {
            return fail("qubit_counts, gate_counts and variants must be non-empty".into());
        }
        if self.qubit_counts.iter().chain(&self.gate_counts).any(|&x| x == 0) {
            return fail("qubit and gate counts must be positive".into());
        }
        if let Some(&n) = self.qubit_counts.iter().find(|&&n| n > MAX_QUBITS) {
            return fail(format!("{n} qubits exceeds the limit of {MAX_QUBITS}"));
        }
        if self.circuits_per_size == 0 || self.runs_per_model == 0 || self.samples == 0 {
            return fail("circuits_per_size, runs_per_model and samples must be positive".into());
        }
        if self.encodings == 0 || self.decodings == 0 {
            return fail("encodings and decodings must be positive".into());
        }
        let [a, b] = self.split;
        if !(a > 0.0 && b > 0.0 && (a + b - 1.0).abs() < 1e-9) {
            return fail(format!("split fractions must be positive and sum to 1, got {a} + {b}"));
        }
        let (train, test) = self.split_counts();
        if train == 0 || test == 0 {
            return fail(format!(
                "split of {} circuits leaves an empty side ({train}/{test})",
                self.circuits_per_size
            ));
        }
        if OptLevel::from_level(self.opt).is_none() {
            return fail(format!("opt must be 0 or 1, got {}", self.opt));
        }
        if !(self.mse_tol >= 0.0 && self.noise >= 0.0) {
            return fail("mse_tol and noise must be non-negative".into());
        }
        let widest = *self.qubit_counts.iter().max().expect("non-empty");
        CouplingMap::from_id(&self.map, widest).map_err(|e| BenchError::Validation(e.to_string()))?;
        self.model.validate().map_err(BenchError::Validation)?;
        self.train
            .to_train_config(Variant::Gru, 0)
            .validate()
            .map_err(BenchError::Validation)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!(c.qubit_counts, vec![2, 4, 6]);
        assert_eq!(c.gate_counts, vec![16, 24, 32]);
        assert_eq!(c.split_counts(), (270, 30));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn toml_round_trip_and_partial_files() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
        let p = ExperimentConfig::from_toml("qubit_counts = [2]\n[train]\nepochs = 3\n").unwrap();
        assert_eq!(p.qubit_counts, vec![2]);
        assert_eq!(p.train.epochs, 3);
        assert_eq!(p.gate_counts, vec![16, 24, 32]);
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn validation_failures() {
        let bad = |f: &dyn Fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            matches!(c.validate(), Err(BenchError::Validation(_)))
        };
        assert!(bad(&|c| c.split = [0.8, 0.1]));
        assert!(bad(&|c| c.opt = 2));
        assert!(bad(&|c| c.qubit_counts = vec![0]));
        assert!(bad(&|c| c.map = "torus".into()));
        assert!(bad(&|c| c.circuits_per_size = 1));
        assert!(bad(&|c| c.model.hidden_dim = 0));
        assert!(bad(&|c| c.train.learning_rate = -1.0));
    }
}
