use crate::sim::Operation;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("reduction is undefined for an original count of zero")]
    ZeroOriginal,
}

/// Longest chain of gates, where gates on disjoint qubits share a layer.
pub fn depth<O: Operation>(ops: &[O]) -> usize {
    let width = ops
        .iter()
        .flat_map(|o| o.operands().iter().copied())
        .max()
        .map_or(0, |q| q + 1);
    let mut level = vec![0usize; width];
    let mut deepest = 0;
    for op in ops {
        let l = op.operands().iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for &q in op.operands() {
            level[q] = l;
        }
        deepest = deepest.max(l);
    }
    deepest
}

pub fn gate_count<O: Operation>(ops: &[O]) -> usize {
    ops.len()
}

/// `100·(original − new)/original`; negative when the count grew.
pub fn reduction_pct(original: usize, new: usize) -> Result<f64, MetricError> {
    if original == 0 {
        return Err(MetricError::ZeroOriginal);
    }
    Ok(100.0 * (original as f64 - new as f64) / original as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{random_circuit, GateApplication, QuantumCircuit};
    use crate::gate::GateKind;

    #[test]
    fn depth_and_count() {
        let empty: Vec<GateApplication> = vec![];
        assert_eq!((depth(&empty), gate_count(&empty)), (0, 0));
        let par = vec![
            GateApplication::new(GateKind::X, &[0]),
            GateApplication::new(GateKind::X, &[1]),
        ];
        assert_eq!((depth(&par), gate_count(&par)), (1, 2));
        let chain = vec![
            GateApplication::new(GateKind::H, &[0]),
            GateApplication::new(GateKind::Cx, &[0, 1]),
            GateApplication::new(GateKind::X, &[2]),
            GateApplication::new(GateKind::Z, &[1]),
        ];
        assert_eq!(depth(&chain), 3);
    }

    #[test]
    fn depth_bounded_by_count() {
        for seed in 0..50 {
            let c = random_circuit(1 + (seed as usize % 5), 20, seed);
            assert!(depth(c.gates()) <= c.len());
            if c.num_qubits() == 1 {
                assert_eq!(depth(c.gates()), c.len());
            }
        }
        let one: QuantumCircuit = random_circuit(1, 7, 1);
        assert_eq!(depth(one.gates()), 7);
    }

    #[test]
    fn reduction_arithmetic() {
        assert!((reduction_pct(95, 60).unwrap() - 36.842_105_263_157_9).abs() < 1e-12);
        assert_eq!(reduction_pct(50, 50).unwrap(), 0.0);
        assert_eq!(reduction_pct(100, 173).unwrap(), -73.0);
        assert_eq!(reduction_pct(0, 3), Err(MetricError::ZeroOriginal));
    }
}
