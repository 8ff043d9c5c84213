//! Circuit representation, DAG conversion, exact simulation and transpilation
//! for small quantum circuits.
//!
//! The gate vocabulary is closed (22 non-parametric 1- and 2-qubit kinds).
//! Circuits convert losslessly to port-labelled DAGs, simulate exactly as
//! pure states, and lower to an `{rz, sx, x, cx}` basis on a coupling map.

pub mod circuit;
pub mod dag;
pub mod gate;
pub mod matrix;
pub mod sim;
pub mod transpile;

pub use circuit::{random_circuit, CircuitError, GateApplication, QuantumCircuit};
pub use dag::{circuit_to_dag, dag_to_circuit, CircuitDag, DagError, Edge, NodeKind};
pub use gate::GateKind;
pub use sim::{
    circuit_density_mse, circuit_unitary, density_matrix, density_mse, simulate, DensityMatrix,
    SimError, StateVector,
};
pub use transpile::{transpile, CouplingMap, OptLevel, TranspiledCircuit};
