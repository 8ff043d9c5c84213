//! Circuit intermediate representation and its text/JSON formats.

use crate::gate::GateKind;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("circuit must have at least one qubit")]
    NoQubits,
    #[error("gate {index} ({kind}) expects {expected} operands, got {got}")]
    WrongArity {
        index: usize,
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("gate {index} ({kind}) operand {qubit} out of range for {num_qubits} qubits")]
    OperandOutOfRange {
        index: usize,
        kind: GateKind,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("gate {index} ({kind}) repeats operand {qubit}")]
    RepeatedOperand {
        index: usize,
        kind: GateKind,
        qubit: usize,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid circuit JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateApplication {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl GateApplication {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Self {
        Self {
            kind,
            qubits: qubits.to_vec(),
        }
    }

    fn check(&self, index: usize, num_qubits: usize) -> Result<(), CircuitError> {
        let kind = self.kind;
        if self.qubits.len() != kind.arity() {
            return Err(CircuitError::WrongArity {
                index,
                kind,
                expected: kind.arity(),
                got: self.qubits.len(),
            });
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(CircuitError::OperandOutOfRange {
                    index,
                    kind,
                    qubit: q,
                    num_qubits,
                });
            }
            if self.qubits[..i].contains(&q) {
                return Err(CircuitError::RepeatedOperand {
                    index,
                    kind,
                    qubit: q,
                });
            }
        }
        Ok(())
    }
}

/// A validated circuit: every application fits `num_qubits`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct QuantumCircuit {
    num_qubits: usize,
    gates: Vec<GateApplication>,
}

impl QuantumCircuit {
    pub fn new(num_qubits: usize, gates: Vec<GateApplication>) -> Result<Self, CircuitError> {
        if num_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        for (i, g) in gates.iter().enumerate() {
            g.check(i, num_qubits)?;
        }
        Ok(Self { num_qubits, gates })
    }

    pub fn empty(num_qubits: usize) -> Result<Self, CircuitError> {
        Self::new(num_qubits, Vec::new())
    }

    /// Appends a gate after validating it.
    pub fn push(&mut self, kind: GateKind, qubits: &[usize]) -> Result<(), CircuitError> {
        let g = GateApplication::new(kind, qubits);
        g.check(self.gates.len(), self.num_qubits)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateApplication] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn into_gates(self) -> Vec<GateApplication> {
        self.gates
    }

    /// Line-based text form: `qubits N` then one `gate <kind> <q0> [<q1>]` per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.num_qubits);
        for g in &self.gates {
            out.push_str("gate ");
            out.push_str(g.kind.name());
            for q in &g.qubits {
                let _ = write!(out, " {q}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CircuitError> {
        let mut num_qubits = None;
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut tokens = content.split_whitespace();
            let head = tokens.next().unwrap_or_default();
            let err = |msg: String| CircuitError::Parse { line, msg };
            match (head, num_qubits) {
                ("qubits", None) => {
                    let n = tokens
                        .next()
                        .ok_or_else(|| err("missing qubit count".into()))?
                        .parse::<usize>()
                        .map_err(|e| err(format!("bad qubit count: {e}")))?;
                    if tokens.next().is_some() {
                        return Err(err("trailing tokens after qubit count".into()));
                    }
                    num_qubits = Some(n);
                }
                ("qubits", Some(_)) => return Err(err("duplicate `qubits` header".into())),
                (_, None) => return Err(err("expected `qubits N` header first".into())),
                ("gate", Some(_)) => {
                    let kind = tokens
                        .next()
                        .ok_or_else(|| err("missing gate kind".into()))?
                        .parse::<GateKind>()
                        .map_err(|e| err(e.to_string()))?;
                    let qubits = tokens
                        .map(|t| t.parse::<usize>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| err(format!("bad operand: {e}")))?;
                    gates.push(GateApplication { kind, qubits });
                }
                (other, Some(_)) => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        let n = num_qubits.ok_or(CircuitError::Parse {
            line: 0,
            msg: "missing `qubits N` header".into(),
        })?;
        Self::new(n, gates)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CircuitError> {
        let raw: RawCircuit =
            serde_json::from_str(text).map_err(|e| CircuitError::Json(e.to_string()))?;
        Self::new(raw.num_qubits, raw.gates)
    }
}

#[derive(Deserialize)]
struct RawCircuit {
    num_qubits: usize,
    gates: Vec<GateApplication>,
}

impl<'de> Deserialize<'de> for QuantumCircuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawCircuit::deserialize(d)?;
        QuantumCircuit::new(raw.num_qubits, raw.gates).map_err(serde::de::Error::custom)
    }
}

/// Uniform random circuit over the gate vocabulary.
///
/// Two-qubit kinds are only drawn when `n_qubits >= 2`; operands are drawn
/// uniformly without replacement.
pub fn random_circuit(n_qubits: usize, n_gates: usize, seed: u64) -> QuantumCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_circuit_with(n_qubits, n_gates, &mut rng)
}

pub fn random_circuit_with<R: Rng + ?Sized>(
    n_qubits: usize,
    n_gates: usize,
    rng: &mut R,
) -> QuantumCircuit {
    assert!(n_qubits >= 1, "random_circuit needs at least one qubit");
    let kinds: &[GateKind] = if n_qubits >= 2 {
        &GateKind::ALL
    } else {
        GateKind::one_qubit()
    };
    let gates = (0..n_gates)
        .map(|_| {
            let kind = kinds[rng.random_range(0..kinds.len())];
            let qubits = sample(rng, n_qubits, kind.arity()).into_vec();
            GateApplication { kind, qubits }
        })
        .collect();
    QuantumCircuit::new(n_qubits, gates).expect("random circuit is valid by construction")
}
