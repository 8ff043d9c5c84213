//! Candidate generation from the latent space and equivalence-gated selection.

use crate::decoder::DecodeMode;
use crate::latent::{reparameterize, standard_normal};
use crate::model::{Model, ModelError};
use qcgen_core::transpile::CouplingError;
use qcgen_core::transpile::TranspileError;
use qcgen_core::{
    circuit_density_mse, circuit_to_dag, dag_to_circuit, transpile, CouplingMap, OptLevel, QuantumCircuit,
    SimError,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    Transpile(#[from] TranspileError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Target on which source and candidates are both measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalContext {
    /// Coupling map id, see [`CouplingMap::from_id`].
    pub map: String,
    pub opt: OptLevel,
}

impl Default for EvalContext {
    fn default() -> Self {
        Self {
            map: "line".into(),
            opt: OptLevel::Light,
        }
    }
}

impl EvalContext {
    pub fn new(map: &str, opt: OptLevel) -> Self {
        Self {
            map: map.to_string(),
            opt,
        }
    }

    pub fn coupling_map(&self, num_qubits: usize) -> Result<CouplingMap, SearchError> {
        Ok(CouplingMap::from_id(&self.map, num_qubits)?)
    }

    /// (transpiled gate count, transpiled depth).
    pub fn metrics(&self, circuit: &QuantumCircuit) -> Result<(usize, usize), SearchError> {
        let map = self.coupling_map(circuit.num_qubits())?;
        let t = transpile(circuit, &map, self.opt)?;
        Ok((t.transpiled_gate_count, t.depth))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub encoding: usize,
    pub decoding: usize,
    pub noise_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub circuit: QuantumCircuit,
    pub density_mse: f64,
    pub transpiled_gates: usize,
    pub transpiled_depth: usize,
    /// Transpiled gate count of the circuit this candidate replaces.
    pub source_gates: usize,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceMetrics {
    pub num_qubits: usize,
    pub gates: usize,
    pub transpiled_gates: usize,
    pub transpiled_depth: usize,
}

impl SourceMetrics {
    pub fn measure(circuit: &QuantumCircuit, ctx: &EvalContext) -> Result<Self, SearchError> {
        let (transpiled_gates, transpiled_depth) = ctx.metrics(circuit)?;
        Ok(Self {
            num_qubits: circuit.num_qubits(),
            gates: circuit.len(),
            transpiled_gates,
            transpiled_depth,
        })
    }
}

fn score(
    source: &QuantumCircuit,
    source_gates: usize,
    circuit: QuantumCircuit,
    ctx: &EvalContext,
    provenance: Provenance,
) -> Result<Candidate, SearchError> {
    let density_mse = circuit_density_mse(source, &circuit)?;
    let (transpiled_gates, transpiled_depth) = ctx.metrics(&circuit)?;
    Ok(Candidate {
        circuit,
        density_mse,
        transpiled_gates,
        transpiled_depth,
        source_gates,
        provenance,
    })
}

/// `n_enc` latent draws, each decoded `n_dec` times in sample mode, every
/// decode capped at the source gate count.
pub fn reconstruct<R: Rng + ?Sized>(
    circuit: &QuantumCircuit,
    model: &Model,
    ctx: &EvalContext,
    n_enc: usize,
    n_dec: usize,
    rng: &mut R,
) -> Result<Vec<Candidate>, SearchError> {
    let source_gates = ctx.metrics(circuit)?.0;
    let (mu, logvar) = model.encode(&circuit_to_dag(circuit))?;
    let mut out = Vec::with_capacity(n_enc * n_dec);
    for e in 0..n_enc {
        let z = reparameterize(&mu, &logvar, rng);
        for d in 0..n_dec {
            let dag = model.decode(&z, circuit.num_qubits(), circuit.len(), DecodeMode::Sample, rng)?;
            let prov = Provenance {
                encoding: e,
                decoding: d,
                noise_scale: 0.0,
            };
            out.push(score(circuit, source_gates, dag_to_circuit(&dag), ctx, prov)?);
        }
    }
    Ok(out)
}

/// Stable sort by (MSE bucket of width 1e-3, transpiled gates, depth).
pub fn rank(candidates: &mut [Candidate]) {
    candidates.sort_by_key(|c| {
        (
            (c.density_mse / 1e-3).floor() as u64,
            c.transpiled_gates,
            c.transpiled_depth,
        )
    });
}

/// Decodes `k` perturbations `mu + noise_scale * eps` of the source encoding
/// and returns them ranked.
pub fn perturb_search<R: Rng + ?Sized>(
    circuit: &QuantumCircuit,
    model: &Model,
    ctx: &EvalContext,
    k: usize,
    noise_scale: f64,
    mode: DecodeMode,
    rng: &mut R,
) -> Result<Vec<Candidate>, SearchError> {
    let source_gates = ctx.metrics(circuit)?.0;
    let (mu, _) = model.encode(&circuit_to_dag(circuit))?;
    let mut out = Vec::with_capacity(k);
    for i in 0..k {
        let eps = standard_normal(mu.len(), rng);
        let z: Vec<f64> = mu.iter().zip(&eps).map(|(m, e)| m + noise_scale * e).collect();
        let dag = model.decode(&z, circuit.num_qubits(), circuit.len(), mode, rng)?;
        let prov = Provenance {
            encoding: 0,
            decoding: i,
            noise_scale,
        };
        out.push(score(circuit, source_gates, dag_to_circuit(&dag), ctx, prov)?);
    }
    rank(&mut out);
    Ok(out)
}

/// Index of the best candidate that is equivalent within `mse_tol` and no
/// larger than its source after transpilation.
pub fn select_best_index(candidates: &[Candidate], mse_tol: f64) -> Option<usize> {
    candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.density_mse <= mse_tol && c.transpiled_gates <= c.source_gates)
        .min_by_key(|(i, c)| (c.transpiled_gates, c.transpiled_depth, *i))
        .map(|(i, _)| i)
}

pub fn select_best(candidates: &[Candidate], mse_tol: f64) -> Option<&Candidate> {
    select_best_index(candidates, mse_tol).map(|i| &candidates[i])
}

/// Per-circuit search record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub source: SourceMetrics,
    pub mse_tol: f64,
    pub candidates: Vec<Candidate>,
    pub selected: Option<usize>,
}

impl SearchReport {
    pub fn new(source: SourceMetrics, candidates: Vec<Candidate>, mse_tol: f64) -> Self {
        let selected = select_best_index(&candidates, mse_tol);
        Self {
            source,
            mse_tol,
            candidates,
            selected,
        }
    }

    pub fn selected(&self) -> Option<&Candidate> {
        self.selected.map(|i| &self.candidates[i])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qcgen_core::GateKind;

    fn cand(mse: f64, gates: usize, depth: usize, source: usize) -> Candidate {
        Candidate {
            circuit: QuantumCircuit::empty(1).unwrap(),
            density_mse: mse,
            transpiled_gates: gates,
            transpiled_depth: depth,
            source_gates: source,
            provenance: Provenance {
                encoding: 0,
                decoding: 0,
                noise_scale: 0.0,
            },
        }
    }

    #[test]
    fn selection_rules() {
        assert!(select_best(&[], 0.01).is_none());
        let one = [cand(0.0, 3, 3, 5)];
        assert_eq!(select_best(&one, 0.01), Some(&one[0]));
        let tie = [cand(0.0, 3, 3, 5), cand(0.0, 3, 2, 5)];
        assert_eq!(select_best_index(&tie, 0.01), Some(1));
        let same = [cand(0.0, 3, 2, 5), cand(0.0, 3, 2, 5)];
        assert_eq!(select_best_index(&same, 0.01), Some(0));
        let gated = [cand(0.02, 1, 1, 5), cand(0.0, 6, 1, 5), cand(0.005, 4, 4, 5)];
        assert_eq!(select_best_index(&gated, 0.01), Some(2));
        assert_eq!(select_best_index(&gated[..2], 0.01), None);
    }

    #[test]
    fn ranking_buckets_mse_then_gates_then_depth() {
        let mut v = vec![
            cand(0.0105, 1, 1, 9),
            cand(0.0002, 8, 3, 9),
            cand(0.0009, 5, 7, 9),
            cand(0.0, 5, 2, 9),
        ];
        rank(&mut v);
        let key: Vec<_> = v.iter().map(|c| (c.transpiled_gates, c.transpiled_depth)).collect();
        assert_eq!(key, vec![(5, 2), (5, 7), (8, 3), (1, 1)]);
    }

    #[test]
    fn context_measures_transpiled_size() {
        let ctx = EvalContext::new("line", OptLevel::Light);
        let mut c = QuantumCircuit::empty(2).unwrap();
        c.push(GateKind::X, &[0]).unwrap();
        c.push(GateKind::X, &[0]).unwrap();
        assert_eq!(ctx.metrics(&c).unwrap(), (0, 0));
    }
}
