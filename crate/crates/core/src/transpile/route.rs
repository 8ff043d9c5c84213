use super::coupling::CouplingMap;
use super::{Instruction, LoweredCircuit};
use crate::gate::GateKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RouteError {
    #[error("{logical} logical qubits do not fit on {physical} physical qubits")]
    TooFewPhysical { logical: usize, physical: usize },
    #[error("no path between physical qubits {0} and {1}")]
    DisconnectedMap(usize, usize),
    #[error("layout is not injective or references qubits outside the map")]
    BadLayout,
}

/// Injective logical-to-physical assignment, updated as swaps are inserted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    logical_to_physical: Vec<usize>,
}

impl Layout {
    /// Logical `i` on physical `i`.
    pub fn trivial(num_logical: usize) -> Self {
        Self {
            logical_to_physical: (0..num_logical).collect(),
        }
    }

    pub fn from_vec(logical_to_physical: Vec<usize>, num_physical: usize) -> Result<Self, RouteError> {
        let mut seen = vec![false; num_physical];
        for &p in &logical_to_physical {
            if p >= num_physical || std::mem::replace(&mut seen[p], true) {
                return Err(RouteError::BadLayout);
            }
        }
        Ok(Self { logical_to_physical })
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.logical_to_physical[logical]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.logical_to_physical
    }

    pub fn num_logical(&self) -> usize {
        self.logical_to_physical.len()
    }

    /// Exchanges whatever occupies physical `a` and `b`.
    fn swap_physical(&mut self, a: usize, b: usize) {
        for p in &mut self.logical_to_physical {
            if *p == a {
                *p = b;
            } else if *p == b {
                *p = a;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Routed {
    pub circuit: LoweredCircuit,
    pub final_layout: Layout,
    pub swaps_inserted: usize,
}

/// Greedy router. Gates are processed in order; a 2-qubit gate on
/// non-adjacent physical qubits first swaps its first operand along a BFS
/// shortest path until it neighbours the second operand.
///
/// Inserted swaps are emitted as `swap` instructions on physical qubits.
pub fn route(
    circuit: &LoweredCircuit,
    map: &CouplingMap,
    initial: &Layout,
) -> Result<Routed, RouteError> {
    let n = circuit.num_qubits;
    if n > map.num_physical() {
        return Err(RouteError::TooFewPhysical {
            logical: n,
            physical: map.num_physical(),
        });
    }
    if initial.num_logical() != n {
        return Err(RouteError::BadLayout);
    }
    let mut layout = Layout::from_vec(initial.as_slice().to_vec(), map.num_physical())?;
    let mut out = Vec::with_capacity(circuit.instructions.len());
    let mut swaps = 0;
    for inst in &circuit.instructions {
        if let [a, b] = inst.qubits[..] {
            let (pa, pb) = (layout.physical(a), layout.physical(b));
            if !map.is_adjacent(pa, pb) {
                let path = map
                    .shortest_path(pa, pb)
                    .ok_or(RouteError::DisconnectedMap(pa, pb))?;
                for w in path[..path.len() - 1].windows(2) {
                    out.push(Instruction::gate(GateKind::Swap, &[w[0], w[1]]));
                    layout.swap_physical(w[0], w[1]);
                    swaps += 1;
                }
            }
        }
        let qubits = inst.qubits.iter().map(|&q| layout.physical(q)).collect();
        out.push(Instruction {
            op: inst.op,
            qubits,
        });
    }
    Ok(Routed {
        circuit: LoweredCircuit {
            num_qubits: map.num_physical(),
            instructions: out,
        },
        final_layout: layout,
        swaps_inserted: swaps,
    })
}
