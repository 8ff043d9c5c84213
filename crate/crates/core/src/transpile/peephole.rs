use super::{Instruction, Op};
use crate::circuit::{GateApplication, QuantumCircuit};
use crate::gate::GateKind;

fn is_identity(inst: &Instruction) -> bool {
    match inst.op {
        Op::Gate(GateKind::Id) => true,
        Op::Rz(a) => a.is_zero(),
        Op::Gate(_) => false,
    }
}

fn cancels(a: &Instruction, b: &Instruction) -> bool {
    match (a.op, b.op) {
        (Op::Rz(x), Op::Rz(y)) => a.qubits == b.qubits && (x + y).is_zero(),
        (Op::Gate(GateKind::Dcx), Op::Gate(GateKind::Dcx)) => {
            a.qubits.len() == 2 && a.qubits[0] == b.qubits[1] && a.qubits[1] == b.qubits[0]
        }
        (Op::Gate(x), Op::Gate(y)) => {
            if x.inverse() != Some(y) {
                return false;
            }
            if a.qubits == b.qubits {
                return true;
            }
            x.is_symmetric()
                && a.qubits.len() == 2
                && a.qubits[0] == b.qubits[1]
                && a.qubits[1] == b.qubits[0]
        }
        _ => false,
    }
}

/// Deletes adjacent inverse pairs (and identity gates) until a fixpoint.
///
/// Two gates are adjacent when no gate between them touches any of their
/// operands. Gate count never increases.
pub fn peephole(instructions: &[Instruction]) -> Vec<Instruction> {
    let mut alive: Vec<Option<Instruction>> = instructions.iter().cloned().map(Some).collect();
    loop {
        let mut changed = false;
        for i in 0..alive.len() {
            let Some(cur) = alive[i].clone() else { continue };
            if is_identity(&cur) {
                alive[i] = None;
                changed = true;
                continue;
            }
            let next = (i + 1..alive.len()).find(|&j| {
                alive[j]
                    .as_ref()
                    .is_some_and(|g| g.qubits.iter().any(|q| cur.qubits.contains(q)))
            });
            if let Some(j) = next {
                let other = alive[j].as_ref().expect("found alive");
                let same_support = other.qubits.len() == cur.qubits.len()
                    && other.qubits.iter().all(|q| cur.qubits.contains(q));
                if same_support && cancels(&cur, other) {
                    alive[i] = None;
                    alive[j] = None;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    alive.into_iter().flatten().collect()
}

/// [`peephole`] over a vocabulary circuit.
pub fn peephole_circuit(circuit: &QuantumCircuit) -> QuantumCircuit {
    let insts: Vec<Instruction> = circuit
        .gates()
        .iter()
        .map(|g| Instruction::gate(g.kind, &g.qubits))
        .collect();
    let gates = peephole(&insts)
        .into_iter()
        .map(|inst| match inst.op {
            Op::Gate(kind) => GateApplication {
                kind,
                qubits: inst.qubits,
            },
            Op::Rz(_) => unreachable!("vocabulary circuits contain no rz"),
        })
        .collect();
    QuantumCircuit::new(circuit.num_qubits(), gates).expect("subsequence of a valid circuit")
}
