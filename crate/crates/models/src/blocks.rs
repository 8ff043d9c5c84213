//! Splitting wide circuits into narrow consecutive blocks, and optimizing each
//! block with the model trained for its width.

use crate::decoder::DecodeMode;
use crate::model::Model;
use crate::search::{perturb_search, select_best, EvalContext, SearchError};
use qcgen_core::{GateApplication, QuantumCircuit};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A run of consecutive gates re-indexed onto its own qubit support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    /// Global qubit of each local qubit, ascending.
    pub qubits: Vec<usize>,
    pub circuit: QuantumCircuit,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlockError {
    #[error("blocks need room for a two-qubit gate, got max_block_qubits = {0}")]
    TooNarrow(usize),
}

fn close(gates: Vec<GateApplication>, support: &[usize]) -> Block {
    let mut qubits = support.to_vec();
    qubits.sort_unstable();
    let local: Vec<GateApplication> = gates
        .into_iter()
        .map(|g| {
            let qs: Vec<usize> = g
                .qubits
                .iter()
                .map(|q| qubits.binary_search(q).expect("operand in support"))
                .collect();
            GateApplication::new(g.kind, &qs)
        })
        .collect();
    let circuit = QuantumCircuit::new(qubits.len(), local).expect("local indices are in range");
    Block { qubits, circuit }
}

/// Greedy left-to-right slicing: a block grows while the union of its
/// operands stays within `max_block_qubits`.
pub fn block_partition(circuit: &QuantumCircuit, max_block_qubits: usize) -> Result<Vec<Block>, BlockError> {
    if max_block_qubits < 2 {
        return Err(BlockError::TooNarrow(max_block_qubits));
    }
    let mut blocks = Vec::new();
    let mut gates: Vec<GateApplication> = Vec::new();
    let mut support: Vec<usize> = Vec::new();
    for g in circuit.gates() {
        let extra = g.qubits.iter().filter(|q| !support.contains(q)).count();
        if support.len() + extra > max_block_qubits {
            blocks.push(close(std::mem::take(&mut gates), &support));
            support.clear();
        }
        for &q in &g.qubits {
            if !support.contains(&q) {
                support.push(q);
            }
        }
        gates.push(g.clone());
    }
    if !gates.is_empty() {
        blocks.push(close(gates, &support));
    }
    Ok(blocks)
}

/// Concatenates blocks, mapping local qubits back to global ones.
pub fn reassemble(num_qubits: usize, blocks: &[Block]) -> QuantumCircuit {
    let gates = blocks
        .iter()
        .flat_map(|b| {
            b.circuit.gates().iter().map(|g| {
                let qs: Vec<usize> = g.qubits.iter().map(|&q| b.qubits[q]).collect();
                GateApplication::new(g.kind, &qs)
            })
        })
        .collect();
    QuantumCircuit::new(num_qubits, gates).expect("blocks come from a circuit of this size")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSearch {
    pub max_block_qubits: usize,
    pub samples: usize,
    pub noise_scale: f64,
    pub mode: DecodeMode,
    pub mse_tol: f64,
}

impl Default for BlockSearch {
    fn default() -> Self {
        Self {
            max_block_qubits: 5,
            samples: 100,
            noise_scale: 0.5,
            mode: DecodeMode::Greedy,
            mse_tol: 0.01,
        }
    }
}

/// Replaces each block by its best equivalent candidate. Blocks whose width
/// has no model, or with no passing candidate, are kept as they are.
pub fn block_optimize<R: Rng + ?Sized>(
    circuit: &QuantumCircuit,
    models: &BTreeMap<usize, Model>,
    ctx: &EvalContext,
    opts: &BlockSearch,
    rng: &mut R,
) -> Result<QuantumCircuit, SearchError> {
    let blocks = block_partition(circuit, opts.max_block_qubits.max(2)).expect("width checked");
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        let Some(model) = models.get(&b.qubits.len()) else {
            out.push(b);
            continue;
        };
        let cands = perturb_search(&b.circuit, model, ctx, opts.samples, opts.noise_scale, opts.mode, rng)?;
        match select_best(&cands, opts.mse_tol) {
            Some(best) => out.push(Block {
                qubits: b.qubits,
                circuit: best.circuit.clone(),
            }),
            None => out.push(b),
        }
    }
    Ok(reassemble(circuit.num_qubits(), &out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qcgen_core::{random_circuit, GateKind};

    #[test]
    fn narrow_circuit_is_one_block() {
        let c = random_circuit(5, 30, 1);
        let b = block_partition(&c, 5).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].circuit.len(), 30);
        assert_eq!(reassemble(5, &b), c);
    }

    #[test]
    fn slicing_and_reindexing() {
        let mut c = QuantumCircuit::empty(6).unwrap();
        c.push(GateKind::Cx, &[5, 1]).unwrap();
        c.push(GateKind::H, &[3]).unwrap();
        c.push(GateKind::Cz, &[0, 2]).unwrap();
        let b = block_partition(&c, 3).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].qubits, vec![1, 3, 5]);
        assert_eq!(b[0].circuit.gates()[0].qubits, vec![2, 0]);
        assert_eq!(b[1].qubits, vec![0, 2]);
        assert_eq!(reassemble(6, &b), c);
        assert_eq!(block_partition(&c, 1), Err(BlockError::TooNarrow(1)));
        assert!(block_partition(&QuantumCircuit::empty(3).unwrap(), 2).unwrap().is_empty());
    }

    #[test]
    fn missing_models_leave_the_circuit_alone() {
        let c = random_circuit(8, 40, 2);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let out = block_optimize(&c, &BTreeMap::new(), &EvalContext::default(), &BlockSearch::default(), &mut rng)
            .unwrap();
        assert_eq!(out, c);
    }
}
