//! Exact pure-state simulation and density-matrix comparison.
//!
//! Qubit 0 is the most significant bit of a basis index, matching the
//! big-endian operand convention of the gate matrices.

use crate::circuit::{GateApplication, QuantumCircuit};
use crate::gate::GateKind;
use crate::matrix::{CMatrix, C64, ONE, ZERO};
use serde::{Deserialize, Serialize};

/// Largest register the dense simulator accepts.
pub const MAX_SIM_QUBITS: usize = 12;
/// Largest register for which full circuit unitaries are built.
pub const MAX_UNITARY_QUBITS: usize = 6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("operand {qubit} out of range for {num_qubits} qubits")]
    OperandOutOfRange { qubit: usize, num_qubits: usize },
    #[error("operands must be distinct")]
    RepeatedOperand,
    #[error("matrix of dimension {dim} does not act on {arity} qubits")]
    ArityMismatch { dim: usize, arity: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{num_qubits} qubits exceeds the cap of {cap}")]
    TooLarge { num_qubits: usize, cap: usize },
}

/// Anything that applies a fixed unitary to an ordered list of qubits.
pub trait Operation {
    fn matrix(&self) -> CMatrix;
    fn operands(&self) -> &[usize];
}

impl Operation for GateApplication {
    fn matrix(&self) -> CMatrix {
        self.kind.unitary()
    }
    fn operands(&self) -> &[usize] {
        &self.qubits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// |0…0⟩ on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self, SimError> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, SimError> {
        if num_qubits > MAX_SIM_QUBITS {
            return Err(SimError::TooLarge {
                num_qubits,
                cap: MAX_SIM_QUBITS,
            });
        }
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        Ok(Self { num_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<C64>) -> Self {
        assert!(amps.len().is_power_of_two(), "length must be 2^N");
        let num_qubits = amps.len().trailing_zeros() as usize;
        Self { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            num_qubits: self.num_qubits,
            amps: self.amps.iter().map(|&a| a * s).collect(),
        }
    }

    /// Applies a 2^k x 2^k unitary to the ordered operand list in place.
    pub fn apply_matrix(&mut self, u: &CMatrix, qubits: &[usize]) -> Result<(), SimError> {
        let n = self.num_qubits;
        for (i, &q) in qubits.iter().enumerate() {
            if q >= n {
                return Err(SimError::OperandOutOfRange {
                    qubit: q,
                    num_qubits: n,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(SimError::RepeatedOperand);
            }
        }
        if u.dim() != 1 << qubits.len() {
            return Err(SimError::ArityMismatch {
                dim: u.dim(),
                arity: qubits.len(),
            });
        }
        let bit = |q: usize| 1usize << (n - 1 - q);
        match qubits {
            [q] => {
                let b = bit(*q);
                let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
                for i in 0..self.amps.len() {
                    if i & b == 0 {
                        let a0 = self.amps[i];
                        let a1 = self.amps[i | b];
                        self.amps[i] = u00 * a0 + u01 * a1;
                        self.amps[i | b] = u10 * a0 + u11 * a1;
                    }
                }
            }
            [qa, qb] => {
                let (ba, bb) = (bit(*qa), bit(*qb));
                for i in 0..self.amps.len() {
                    if i & (ba | bb) == 0 {
                        let idx = [i, i | bb, i | ba, i | ba | bb];
                        let old = idx.map(|j| self.amps[j]);
                        for (r, &j) in idx.iter().enumerate() {
                            self.amps[j] = (0..4).map(|col| u[(r, col)] * old[col]).sum();
                        }
                    }
                }
            }
            _ => {
                return Err(SimError::ArityMismatch {
                    dim: u.dim(),
                    arity: qubits.len(),
                })
            }
        }
        Ok(())
    }

    pub fn apply<O: Operation + ?Sized>(&mut self, op: &O) -> Result<(), SimError> {
        self.apply_matrix(&op.matrix(), op.operands())
    }
}

/// Returns `state` with `kind` applied to `qubits`.
pub fn apply_gate(
    state: &StateVector,
    kind: GateKind,
    qubits: &[usize],
) -> Result<StateVector, SimError> {
    let mut out = state.clone();
    out.apply_matrix(&kind.unitary(), qubits)?;
    Ok(out)
}

/// Runs a list of operations on |0…0⟩.
pub fn simulate_ops<'a, O, I>(num_qubits: usize, ops: I) -> Result<StateVector, SimError>
where
    O: Operation + 'a,
    I: IntoIterator<Item = &'a O>,
{
    let mut state = StateVector::zero(num_qubits)?;
    for op in ops {
        state.apply(op)?;
    }
    Ok(state)
}

pub fn simulate(circuit: &QuantumCircuit) -> Result<StateVector, SimError> {
    simulate_ops(circuit.num_qubits(), circuit.gates())
}

/// ρ = |ψ⟩⟨ψ| for a pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.rho[(i, i)]).sum()
    }

    /// Row-major nested arrays of `[re, im]` pairs.
    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim())
            .map(|r| {
                (0..self.dim())
                    .map(|c| {
                        let z = self.rho[(r, c)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string(&DensityJson { rows }).expect("density matrix serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct DensityJson {
    rows: Vec<Vec<[f64; 2]>>,
}

pub fn density_matrix(state: &StateVector) -> DensityMatrix {
    let a = state.amplitudes();
    let dim = a.len();
    let mut rho = CMatrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            rho[(r, c)] = a[r] * a[c].conj();
        }
    }
    DensityMatrix {
        num_qubits: state.num_qubits(),
        rho,
    }
}

/// Mean over all entries of the squared modulus of the difference.
pub fn density_mse(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, SimError> {
    if a.dim() != b.dim() {
        return Err(SimError::DimensionMismatch(a.dim(), b.dim()));
    }
    let total: f64 = a
        .rho
        .as_slice()
        .iter()
        .zip(b.rho.as_slice())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    Ok(total / (a.dim() * a.dim()) as f64)
}

/// Density-matrix MSE between the output states of two circuits.
pub fn circuit_density_mse(a: &QuantumCircuit, b: &QuantumCircuit) -> Result<f64, SimError> {
    let ra = density_matrix(&simulate(a)?);
    let rb = density_matrix(&simulate(b)?);
    density_mse(&ra, &rb)
}

/// Full-register matrix of `u` acting on `qubits` of an `n`-qubit register.
pub fn embed(u: &CMatrix, qubits: &[usize], n: usize) -> CMatrix {
    let dim = 1usize << n;
    let k = qubits.len();
    let mask: usize = qubits.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    // local index of a full basis index: operand 0 is the high bit
    let local = |idx: usize| -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1))
    };
    debug_assert_eq!(u.dim(), 1 << k);
    let mut m = CMatrix::zeros(dim);
    for r in 0..dim {
        for c in 0..dim {
            if r & !mask == c & !mask {
                m[(r, c)] = u[(local(r), local(c))];
            }
        }
    }
    m
}

pub fn ops_unitary<'a, O, I>(num_qubits: usize, ops: I) -> Result<CMatrix, SimError>
where
    O: Operation + 'a,
    I: IntoIterator<Item = &'a O>,
{
    if num_qubits > MAX_UNITARY_QUBITS {
        return Err(SimError::TooLarge {
            num_qubits,
            cap: MAX_UNITARY_QUBITS,
        });
    }
    let mut total = CMatrix::identity(1 << num_qubits);
    for op in ops {
        total = &embed(&op.matrix(), op.operands(), num_qubits) * &total;
    }
    Ok(total)
}

/// Ordered product of the embedded gate unitaries.
pub fn circuit_unitary(circuit: &QuantumCircuit) -> Result<CMatrix, SimError> {
    ops_unitary(circuit.num_qubits(), circuit.gates())
}

/// True when `u = c·v` for some unit scalar `c`, within `tol` entrywise.
///
/// `c` is taken from the largest-modulus entry of the first row of `v`.
pub fn phase_equivalent(u: &CMatrix, v: &CMatrix, tol: f64) -> Result<bool, SimError> {
    if u.dim() != v.dim() {
        return Err(SimError::DimensionMismatch(u.dim(), v.dim()));
    }
    let n = v.dim();
    let col = (0..n)
        .max_by(|&a, &b| v[(0, a)].norm().total_cmp(&v[(0, b)].norm()).then(b.cmp(&a)))
        .expect("non-empty matrix");
    let pivot = v[(0, col)];
    if pivot.norm() == 0.0 {
        return Ok(u.max_abs_diff(v) <= tol);
    }
    let ratio = u[(0, col)] / pivot;
    if ratio.norm() == 0.0 {
        return Ok(false);
    }
    let c = ratio / ratio.norm();
    Ok(u.max_abs_diff(&v.scale(c)) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn single_qubit_kernels() {
        let s = apply_gate(&StateVector::zero(1).unwrap(), GateKind::X, &[0]).unwrap();
        assert_eq!(s.amplitudes(), &[ZERO, ONE]);
        let s = apply_gate(&StateVector::zero(1).unwrap(), GateKind::H, &[0]).unwrap();
        assert!(close(s.amplitudes()[0], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[1], c(FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn cx_control_is_operand_zero() {
        // |10> has index 2 with qubit 0 as the high bit
        let s = StateVector::basis(2, 0b10).unwrap();
        let out = apply_gate(&s, GateKind::Cx, &[0, 1]).unwrap();
        assert_eq!(out.amplitudes()[0b11], ONE);
        assert!(apply_gate(&s, GateKind::Cx, &[0, 2]).is_err());
        assert_eq!(
            apply_gate(&s, GateKind::Cx, &[1, 1]),
            Err(SimError::RepeatedOperand)
        );
    }

    #[test]
    fn bell_state() {
        let mut bell = QuantumCircuit::empty(2).unwrap();
        bell.push(GateKind::H, &[0]).unwrap();
        bell.push(GateKind::Cx, &[0, 1]).unwrap();
        let s = simulate(&bell).unwrap();
        let h = FRAC_1_SQRT_2;
        let expect = [h, 0.0, 0.0, h];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!(close(*a, c(e, 0.0)));
        }
        let empty = simulate(&QuantumCircuit::empty(2).unwrap()).unwrap();
        assert_eq!(empty.amplitudes()[0], ONE);
    }

    #[test]
    fn density_matrices_and_mse() {
        let zero = StateVector::zero(1).unwrap();
        let one = apply_gate(&zero, GateKind::X, &[0]).unwrap();
        let plus = apply_gate(&zero, GateKind::H, &[0]).unwrap();
        let r0 = density_matrix(&zero);
        let r1 = density_matrix(&one);
        let rp = density_matrix(&plus);
        assert_eq!(r0.matrix()[(0, 0)], ONE);
        assert_eq!(r1.matrix()[(1, 1)], ONE);
        for &e in rp.matrix().as_slice() {
            assert!(close(e, c(0.5, 0.0)));
        }
        let rz = density_matrix(&apply_gate(&zero, GateKind::Z, &[0]).unwrap());
        assert!((density_mse(&r1, &rz).unwrap() - 0.5).abs() < 1e-15);
        assert!((density_mse(&r0, &rp).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(density_mse(&r0, &r0).unwrap(), 0.0);
        let r2 = density_matrix(&StateVector::zero(2).unwrap());
        assert_eq!(density_mse(&r0, &r2), Err(SimError::DimensionMismatch(2, 4)));
    }

    #[test]
    fn unitary_of_small_circuits() {
        let empty = QuantumCircuit::empty(2).unwrap();
        assert_eq!(circuit_unitary(&empty).unwrap(), CMatrix::identity(4));
        let mut x = QuantumCircuit::empty(1).unwrap();
        x.push(GateKind::X, &[0]).unwrap();
        assert_eq!(circuit_unitary(&x).unwrap(), GateKind::X.unitary());
        let mut swap = QuantumCircuit::empty(2).unwrap();
        swap.push(GateKind::Swap, &[0, 1]).unwrap();
        let mut cxs = QuantumCircuit::empty(2).unwrap();
        for q in [[0, 1], [1, 0], [0, 1]] {
            cxs.push(GateKind::Cx, &q).unwrap();
        }
        let d = circuit_unitary(&swap)
            .unwrap()
            .max_abs_diff(&circuit_unitary(&cxs).unwrap());
        assert!(d < 1e-10);
        assert!(matches!(
            circuit_unitary(&QuantumCircuit::empty(7).unwrap()),
            Err(SimError::TooLarge { .. })
        ));
    }

    #[test]
    fn phase_equivalence() {
        let u = GateKind::H.unitary();
        assert!(phase_equivalent(&u, &u, 1e-12).unwrap());
        assert!(phase_equivalent(&u, &u.scale(-ONE), 1e-12).unwrap());
        assert!(phase_equivalent(&u, &u.scale(c(0.6, 0.8)), 1e-12).unwrap());
        assert!(!phase_equivalent(&GateKind::X.unitary(), &GateKind::Z.unitary(), 1e-6).unwrap());
        assert!(phase_equivalent(&u, &CMatrix::identity(4), 1e-6).is_err());
    }

    #[test]
    fn density_matrix_json_shape() {
        let rho = density_matrix(&StateVector::zero(1).unwrap());
        assert_eq!(rho.to_json(), "[[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.0,0.0]]]");
    }
}
