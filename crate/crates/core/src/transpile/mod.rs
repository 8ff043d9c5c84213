//! Lowering to the `{rz, sx, x, cx}` basis on a constrained coupling map.
//!
//! Pipeline: expand 2-qubit kinds into `cx` plus 1-qubit gates, route with
//! swap insertion, expand swaps into three `cx`, translate 1-qubit gates into
//! `rz`/`sx`/`x`, then (at level 1) fuse 1-qubit runs and cancel inverse
//! pairs until nothing changes.

mod coupling;
mod decompose;
mod euler;
mod metrics;
mod peephole;
mod route;

pub use coupling::{CouplingError, CouplingMap};
pub use decompose::decompose_2q;
pub use euler::{euler_1q, EulerError};
pub use metrics::{depth, gate_count, reduction_pct, MetricError};
pub use peephole::{peephole, peephole_circuit};
pub use route::{route, Layout, RouteError, Routed};

use crate::circuit::QuantumCircuit;
use crate::gate::GateKind;
use crate::matrix::{CMatrix, C64, ZERO};
use crate::sim::{simulate_ops, Operation, SimError, StateVector};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;

/// Rotation angle; multiples of π/4 are kept exact so that `rz` pairs cancel
/// without floating-point slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    /// `k·π/4` with `k` in `0..8`.
    Eighth(u8),
    /// Any other angle, wrapped into (−π, π].
    Radians(f64),
}

impl Angle {
    const SNAP: f64 = 1e-9;

    pub fn from_radians(theta: f64) -> Angle {
        let mut w = theta.rem_euclid(2.0 * PI);
        if w > PI {
            w -= 2.0 * PI;
        }
        let m = w / FRAC_PI_4;
        let k = m.round();
        if ((m - k) * FRAC_PI_4).abs() < Self::SNAP {
            Angle::Eighth(k.rem_euclid(8.0) as u8)
        } else {
            Angle::Radians(w)
        }
    }

    pub fn radians(self) -> f64 {
        match self {
            Angle::Eighth(k) if k <= 4 => k as f64 * FRAC_PI_4,
            Angle::Eighth(k) => (k as f64 - 8.0) * FRAC_PI_4,
            Angle::Radians(r) => r,
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, Angle::Eighth(0))
    }

}

impl std::ops::Add for Angle {
    type Output = Angle;

    fn add(self, other: Angle) -> Angle {
        match (self, other) {
            (Angle::Eighth(a), Angle::Eighth(b)) => Angle::Eighth((a + b) % 8),
            _ => Angle::from_radians(self.radians() + other.radians()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Gate(GateKind),
    Rz(Angle),
}

impl Op {
    pub fn matrix(&self) -> CMatrix {
        match *self {
            Op::Gate(k) => k.unitary(),
            Op::Rz(a) => {
                let t = a.radians() / 2.0;
                CMatrix::diagonal(&[C64::from_polar(1.0, -t), C64::from_polar(1.0, t)])
            }
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Op::Gate(k) => k.arity(),
            Op::Rz(_) => 1,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Gate(k) => write!(f, "{k}"),
            Op::Rz(Angle::Eighth(k)) => write!(f, "rz({k}pi/4)"),
            Op::Rz(Angle::Radians(r)) => write!(f, "rz({r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub op: Op,
    pub qubits: Vec<usize>,
}

impl Instruction {
    pub fn gate(kind: GateKind, qubits: &[usize]) -> Self {
        Self {
            op: Op::Gate(kind),
            qubits: qubits.to_vec(),
        }
    }

    pub fn rz(angle: Angle, qubit: usize) -> Self {
        Self {
            op: Op::Rz(angle),
            qubits: vec![qubit],
        }
    }
}

impl Operation for Instruction {
    fn matrix(&self) -> CMatrix {
        self.op.matrix()
    }
    fn operands(&self) -> &[usize] {
        &self.qubits
    }
}

/// Instruction list that may contain basis rotations outside the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct LoweredCircuit {
    pub num_qubits: usize,
    pub instructions: Vec<Instruction>,
}

impl LoweredCircuit {
    pub fn from_circuit(circuit: &QuantumCircuit) -> Self {
        Self {
            num_qubits: circuit.num_qubits(),
            instructions: circuit
                .gates()
                .iter()
                .map(|g| Instruction::gate(g.kind, &g.qubits))
                .collect(),
        }
    }

    pub fn gate_count(&self) -> usize {
        self.instructions.len()
    }

    pub fn depth(&self) -> usize {
        depth(&self.instructions)
    }

    pub fn count_op(&self, kind: GateKind) -> usize {
        self.instructions
            .iter()
            .filter(|i| i.op == Op::Gate(kind))
            .count()
    }

    pub fn simulate(&self) -> Result<StateVector, SimError> {
        simulate_ops(self.num_qubits, &self.instructions)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.num_qubits);
        for inst in &self.instructions {
            let qs: Vec<String> = inst.qubits.iter().map(|q| q.to_string()).collect();
            out.push_str(&format!("{} {}\n", inst.op, qs.join(" ")));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, serde::Deserialize)]
pub enum OptLevel {
    /// Basis translation only.
    #[serde(rename = "0")]
    None,
    /// Adds 1-qubit run fusion and inverse-pair cancellation.
    #[default]
    #[serde(rename = "1")]
    Light,
}

impl OptLevel {
    pub fn from_level(level: u8) -> Option<Self> {
        match level {
            0 => Some(OptLevel::None),
            1 => Some(OptLevel::Light),
            _ => None,
        }
    }

    pub fn level(self) -> u8 {
        match self {
            OptLevel::None => 0,
            OptLevel::Light => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TranspileError {
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Euler(#[from] EulerError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranspiledCircuit {
    pub circuit: LoweredCircuit,
    pub final_layout: Layout,
    pub source_gate_count: usize,
    pub transpiled_gate_count: usize,
    pub depth: usize,
    pub swaps_inserted: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TranspileReport {
    pub num_physical: usize,
    pub source_gate_count: usize,
    pub transpiled_gate_count: usize,
    pub depth: usize,
    pub swaps_inserted: usize,
    pub cx_count: usize,
    pub final_layout: Vec<usize>,
}

impl TranspiledCircuit {
    pub fn report(&self) -> TranspileReport {
        TranspileReport {
            num_physical: self.circuit.num_qubits,
            source_gate_count: self.source_gate_count,
            transpiled_gate_count: self.transpiled_gate_count,
            depth: self.depth,
            swaps_inserted: self.swaps_inserted,
            cx_count: self.circuit.count_op(GateKind::Cx),
            final_layout: self.final_layout.as_slice().to_vec(),
        }
    }

    /// Simulates on the physical register and reads the logical qubits back
    /// through the final layout. Ancilla qubits must end in |0⟩.
    pub fn logical_state(&self) -> Result<StateVector, SimError> {
        let phys = self.circuit.simulate()?;
        Ok(unpermute(&phys, &self.final_layout))
    }
}

/// Extracts the logical state from a physical state, assuming every physical
/// qubit outside the layout is |0⟩.
pub fn unpermute(physical: &StateVector, layout: &Layout) -> StateVector {
    let p = physical.num_qubits();
    let n = layout.num_logical();
    let amps = physical.amplitudes();
    let mut out = vec![ZERO; 1 << n];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut idx = 0usize;
        for logical in 0..n {
            if (j >> (n - 1 - logical)) & 1 == 1 {
                idx |= 1 << (p - 1 - layout.physical(logical));
            }
        }
        *slot = amps[idx];
    }
    StateVector::from_amplitudes(out)
}

/// Basis form of a single vocabulary 1-qubit gate.
fn lower_1q(op: Op) -> Result<Vec<Op>, EulerError> {
    use GateKind::*;
    Ok(match op {
        Op::Rz(a) if a.is_zero() => vec![],
        Op::Rz(_) | Op::Gate(X) | Op::Gate(Sx) => vec![op],
        Op::Gate(Z) => vec![Op::Rz(Angle::Eighth(4))],
        Op::Gate(S) => vec![Op::Rz(Angle::Eighth(2))],
        Op::Gate(Sdg) => vec![Op::Rz(Angle::Eighth(6))],
        Op::Gate(T) => vec![Op::Rz(Angle::Eighth(1))],
        Op::Gate(Tdg) => vec![Op::Rz(Angle::Eighth(7))],
        Op::Gate(k) => euler_1q(&k.unitary())?,
    })
}

fn translate_each(insts: &[Instruction]) -> Result<Vec<Instruction>, EulerError> {
    let mut out = Vec::with_capacity(insts.len());
    for inst in insts {
        if inst.qubits.len() == 1 {
            out.extend(lower_1q(inst.op)?.into_iter().map(|op| Instruction {
                op,
                qubits: inst.qubits.clone(),
            }));
        } else {
            out.push(inst.clone());
        }
    }
    Ok(out)
}

/// Replaces each maximal run of 1-qubit gates on a wire by its Euler
/// resynthesis whenever that is strictly shorter than the per-gate form.
fn fuse_1q_runs(insts: &[Instruction], num_qubits: usize) -> Result<Vec<Instruction>, EulerError> {
    let mut pending: Vec<Vec<Op>> = vec![Vec::new(); num_qubits];
    let mut out = Vec::with_capacity(insts.len());
    let flush = |q: usize, run: &mut Vec<Op>, out: &mut Vec<Instruction>| -> Result<(), EulerError> {
        if run.is_empty() {
            return Ok(());
        }
        let mut plain = Vec::new();
        for op in run.iter() {
            plain.extend(lower_1q(*op)?);
        }
        let product = run
            .iter()
            .fold(CMatrix::identity(2), |acc, op| &op.matrix() * &acc);
        let fused = euler_1q(&product)?;
        let best = if fused.len() < plain.len() { fused } else { plain };
        out.extend(best.into_iter().map(|op| Instruction { op, qubits: vec![q] }));
        run.clear();
        Ok(())
    };
    for inst in insts {
        if let [q] = inst.qubits[..] {
            pending[q].push(inst.op);
        } else {
            for &q in &inst.qubits {
                flush(q, &mut pending[q], &mut out)?;
            }
            out.push(inst.clone());
        }
    }
    for (q, run) in pending.iter_mut().enumerate() {
        flush(q, run, &mut out)?;
    }
    Ok(out)
}

fn expand_swaps(insts: Vec<Instruction>) -> Vec<Instruction> {
    let mut out = Vec::with_capacity(insts.len());
    for inst in insts {
        match (inst.op, &inst.qubits[..]) {
            (Op::Gate(GateKind::Swap), &[a, b]) => {
                out.push(Instruction::gate(GateKind::Cx, &[a, b]));
                out.push(Instruction::gate(GateKind::Cx, &[b, a]));
                out.push(Instruction::gate(GateKind::Cx, &[a, b]));
            }
            _ => out.push(inst),
        }
    }
    out
}

/// Expands every 2-qubit vocabulary gate into `cx` plus 1-qubit gates.
pub fn decompose_circuit(circuit: &QuantumCircuit) -> LoweredCircuit {
    let mut instructions = Vec::with_capacity(circuit.len() * 3);
    for g in circuit.gates() {
        if g.kind.arity() == 1 {
            instructions.push(Instruction::gate(g.kind, &g.qubits));
        } else {
            for local in decompose_2q(g.kind) {
                let qubits: Vec<usize> = local.qubits.iter().map(|&q| g.qubits[q]).collect();
                instructions.push(Instruction::gate(local.kind, &qubits));
            }
        }
    }
    LoweredCircuit {
        num_qubits: circuit.num_qubits(),
        instructions,
    }
}

/// Lowers `circuit` onto `map` with the trivial initial layout.
pub fn transpile(
    circuit: &QuantumCircuit,
    map: &CouplingMap,
    opt: OptLevel,
) -> Result<TranspiledCircuit, TranspileError> {
    let decomposed = decompose_circuit(circuit);
    let routed = route(&decomposed, map, &Layout::trivial(circuit.num_qubits()))?;
    let physical = routed.circuit.num_qubits;
    let expanded = expand_swaps(routed.circuit.instructions);
    let mut insts = match opt {
        OptLevel::None => translate_each(&expanded)?,
        OptLevel::Light => {
            let mut cur = peephole(&fuse_1q_runs(&expanded, physical)?);
            loop {
                let next = peephole(&fuse_1q_runs(&cur, physical)?);
                if next.len() >= cur.len() {
                    break cur;
                }
                cur = next;
            }
        }
    };
    insts.shrink_to_fit();
    let lowered = LoweredCircuit {
        num_qubits: physical,
        instructions: insts,
    };
    Ok(TranspiledCircuit {
        source_gate_count: circuit.len(),
        transpiled_gate_count: lowered.gate_count(),
        depth: lowered.depth(),
        swaps_inserted: routed.swaps_inserted,
        final_layout: routed.final_layout,
        circuit: lowered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random_circuit;
    use crate::sim::{density_matrix, density_mse, simulate};

    fn is_basis(op: &Op) -> bool {
        matches!(
            op,
            Op::Rz(_) | Op::Gate(GateKind::Sx) | Op::Gate(GateKind::X) | Op::Gate(GateKind::Cx)
        )
    }

    fn check_equivalent(c: &QuantumCircuit, t: &TranspiledCircuit) -> f64 {
        let a = density_matrix(&simulate(c).unwrap());
        let b = density_matrix(&t.logical_state().unwrap());
        density_mse(&a, &b).unwrap()
    }

    #[test]
    fn angle_snapping() {
        assert_eq!(Angle::from_radians(PI), Angle::Eighth(4));
        assert_eq!(Angle::from_radians(-PI / 2.0), Angle::Eighth(6));
        assert_eq!(Angle::from_radians(2.0 * PI), Angle::Eighth(0));
        assert!(matches!(Angle::from_radians(0.3), Angle::Radians(_)));
        assert_eq!(Angle::Eighth(6).radians(), -PI / 2.0);
        assert!((Angle::Eighth(3) + Angle::Eighth(5)).is_zero());
    }

    #[test]
    fn empty_circuit() {
        let c = QuantumCircuit::empty(3).unwrap();
        let t = transpile(&c, &CouplingMap::line(3), OptLevel::Light).unwrap();
        assert_eq!((t.transpiled_gate_count, t.depth), (0, 0));
    }

    #[test]
    fn swap_lowers_to_three_cx() {
        let mut c = QuantumCircuit::empty(2).unwrap();
        c.push(GateKind::Swap, &[0, 1]).unwrap();
        let t = transpile(&c, &CouplingMap::line(2), OptLevel::None).unwrap();
        assert_eq!(t.transpiled_gate_count, 3);
        assert_eq!(t.circuit.count_op(GateKind::Cx), 3);
    }

    #[test]
    fn routed_swaps_become_three_cx() {
        let mut c = QuantumCircuit::empty(3).unwrap();
        c.push(GateKind::Cx, &[0, 2]).unwrap();
        let t = transpile(&c, &CouplingMap::line(3), OptLevel::None).unwrap();
        assert_eq!(t.swaps_inserted, 1);
        assert_eq!(t.circuit.count_op(GateKind::Cx), 4);
        assert!(check_equivalent(&c, &t) < 1e-12);
    }

    #[test]
    fn opt1_never_worse_than_opt0() {
        for seed in 0..40 {
            let c = random_circuit(4, 24, seed);
            let map = CouplingMap::line(4);
            let t0 = transpile(&c, &map, OptLevel::None).unwrap();
            let t1 = transpile(&c, &map, OptLevel::Light).unwrap();
            assert!(t1.transpiled_gate_count <= t0.transpiled_gate_count);
            assert!(t1.depth <= t0.depth);
        }
    }

    #[test]
    fn random_circuits_stay_equivalent_on_constrained_maps() {
        for seed in 0..60 {
            let n = 2 + (seed as usize % 5);
            let c = random_circuit(n, 16 + (seed as usize % 17), seed);
            for map in [CouplingMap::line(n), CouplingMap::heavy_hex_12()] {
                for opt in [OptLevel::None, OptLevel::Light] {
                    let t = transpile(&c, &map, opt).unwrap();
                    assert!(t.circuit.instructions.iter().all(|i| is_basis(&i.op)));
                    for inst in &t.circuit.instructions {
                        if inst.qubits.len() == 2 {
                            assert!(map.is_adjacent(inst.qubits[0], inst.qubits[1]));
                        }
                    }
                    let mse = check_equivalent(&c, &t);
                    assert!(mse < 1e-9, "seed {seed} opt {opt:?}: mse {mse}");
                }
            }
        }
    }

    #[test]
    fn x_pair_collapses_at_level_one() {
        let mut c = QuantumCircuit::empty(1).unwrap();
        c.push(GateKind::X, &[0]).unwrap();
        c.push(GateKind::X, &[0]).unwrap();
        let map = CouplingMap::line(1);
        assert_eq!(transpile(&c, &map, OptLevel::None).unwrap().transpiled_gate_count, 2);
        assert_eq!(transpile(&c, &map, OptLevel::Light).unwrap().transpiled_gate_count, 0);
    }

    #[test]
    fn report_serializes() {
        let c = random_circuit(3, 10, 2);
        let t = transpile(&c, &CouplingMap::line(3), OptLevel::Light).unwrap();
        let js = serde_json::to_string(&t.report()).unwrap();
        assert!(js.contains("\"final_layout\""));
        assert!(js.contains("\"depth\""));
    }
}
