//! Port-labelled DAG rendering of a circuit.
//!
//! Node 0 is the start node with one output port per qubit, the last node is
//! the end node with one input port per qubit, and every gate node has
//! `arity` input and output ports. An output port carries the qubit that
//! entered the input port with the same index (wire labels pass through).

use crate::circuit::{GateApplication, QuantumCircuit};
use crate::gate::GateKind;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Number of distinct node types: the gate vocabulary plus start and end.
pub const NODE_TYPE_COUNT: usize = GateKind::COUNT + 2;
pub const START_TYPE: usize = GateKind::COUNT;
pub const END_TYPE: usize = GateKind::COUNT + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Start,
    End,
    Gate(GateKind),
}

impl NodeKind {
    /// Index into the 24-way node type vocabulary.
    pub fn type_index(self) -> usize {
        match self {
            NodeKind::Gate(k) => k.index(),
            NodeKind::Start => START_TYPE,
            NodeKind::End => END_TYPE,
        }
    }

    pub fn from_type_index(idx: usize) -> Option<NodeKind> {
        match idx {
            START_TYPE => Some(NodeKind::Start),
            END_TYPE => Some(NodeKind::End),
            _ => GateKind::from_index(idx).map(NodeKind::Gate),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NodeKind::Start => "start",
            NodeKind::End => "end",
            NodeKind::Gate(k) => k.name(),
        }
    }

    fn in_ports(self, num_qubits: usize) -> usize {
        match self {
            NodeKind::Start => 0,
            NodeKind::End => num_qubits,
            NodeKind::Gate(k) => k.arity(),
        }
    }

    fn out_ports(self, num_qubits: usize) -> usize {
        match self {
            NodeKind::Start => num_qubits,
            NodeKind::End => 0,
            NodeKind::Gate(k) => k.arity(),
        }
    }
}

/// A wire from output port `src_port` of `src` to input port `dst_port` of `dst`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    pub src_port: usize,
    pub dst: usize,
    pub dst_port: usize,
}

impl Edge {
    pub fn new(src: usize, src_port: usize, dst: usize, dst_port: usize) -> Self {
        Self {
            src,
            src_port,
            dst,
            dst_port,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DagError {
    #[error("node 0 must be the only start node")]
    BadStart,
    #[error("the last node must be the only end node")]
    BadEnd,
    #[error("start node has no outgoing wires")]
    NoQubits,
    #[error("edge {0} references a node that does not exist")]
    NodeOutOfRange(usize),
    #[error("edge {edge} uses port {port} that node {node} does not have")]
    PortOutOfRange { edge: usize, node: usize, port: usize },
    #[error("port {port} of node {node} is used more than once")]
    PortReused { node: usize, port: usize },
    #[error("port {port} of node {node} is dangling")]
    DanglingPort { node: usize, port: usize },
    #[error("graph contains a cycle")]
    CycleDetected,
    #[error("end input port {port} carries qubit {qubit}")]
    EndLabelMismatch { port: usize, qubit: usize },
    #[error("invalid DAG JSON: {0}")]
    Json(String),
}

/// A validated circuit DAG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitDag {
    num_qubits: usize,
    nodes: Vec<NodeKind>,
    edges: Vec<Edge>,
    // inputs[v][port] / outputs[v][port] hold edge indices.
    inputs: Vec<Vec<usize>>,
    outputs: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl CircuitDag {
    /// Validates every structural invariant and builds the adjacency tables.
    pub fn from_parts(nodes: Vec<NodeKind>, edges: Vec<Edge>) -> Result<Self, DagError> {
        let n_nodes = nodes.len();
        if nodes.first() != Some(&NodeKind::Start)
            || nodes[1..].contains(&NodeKind::Start)
        {
            return Err(DagError::BadStart);
        }
        if n_nodes < 2
            || nodes.last() != Some(&NodeKind::End)
            || nodes[..n_nodes - 1].contains(&NodeKind::End)
        {
            return Err(DagError::BadEnd);
        }
        for (i, e) in edges.iter().enumerate() {
            if e.src >= n_nodes || e.dst >= n_nodes {
                return Err(DagError::NodeOutOfRange(i));
            }
        }
        let num_qubits = edges.iter().filter(|e| e.src == 0).count();
        if num_qubits == 0 {
            return Err(DagError::NoQubits);
        }

        let mut inputs: Vec<Vec<Option<usize>>> = nodes
            .iter()
            .map(|k| vec![None; k.in_ports(num_qubits)])
            .collect();
        let mut outputs: Vec<Vec<Option<usize>>> = nodes
            .iter()
            .map(|k| vec![None; k.out_ports(num_qubits)])
            .collect();
        for (i, e) in edges.iter().enumerate() {
            let out = outputs[e.src]
                .get_mut(e.src_port)
                .ok_or(DagError::PortOutOfRange {
                    edge: i,
                    node: e.src,
                    port: e.src_port,
                })?;
            if out.replace(i).is_some() {
                return Err(DagError::PortReused {
                    node: e.src,
                    port: e.src_port,
                });
            }
            let inp = inputs[e.dst]
                .get_mut(e.dst_port)
                .ok_or(DagError::PortOutOfRange {
                    edge: i,
                    node: e.dst,
                    port: e.dst_port,
                })?;
            if inp.replace(i).is_some() {
                return Err(DagError::PortReused {
                    node: e.dst,
                    port: e.dst_port,
                });
            }
        }
        let unwrap_ports = |table: Vec<Vec<Option<usize>>>| -> Result<Vec<Vec<usize>>, DagError> {
            table
                .into_iter()
                .enumerate()
                .map(|(node, ports)| {
                    ports
                        .into_iter()
                        .enumerate()
                        .map(|(port, e)| e.ok_or(DagError::DanglingPort { node, port }))
                        .collect()
                })
                .collect()
        };
        let inputs = unwrap_ports(inputs)?;
        let outputs = unwrap_ports(outputs)?;

        let order = topological_order(n_nodes, &edges)?;
        let dag = Self {
            num_qubits,
            nodes,
            edges,
            inputs,
            outputs,
            order,
        };
        let labels = dag.wire_labels();
        let end = dag.end();
        for (port, &e) in dag.inputs[end].iter().enumerate() {
            let edge = dag.edges[e];
            let qubit = labels[edge.src][edge.src_port];
            if qubit != port {
                return Err(DagError::EndLabelMismatch { port, qubit });
            }
        }
        Ok(dag)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn nodes(&self) -> &[NodeKind] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn start(&self) -> usize {
        0
    }

    pub fn end(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn gate_count(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Incoming edges of `node`, ordered by input port.
    pub fn in_edges(&self, node: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.inputs[node].iter().map(move |&e| &self.edges[e])
    }

    /// Outgoing edges of `node`, ordered by output port.
    pub fn out_edges(&self, node: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.outputs[node].iter().map(move |&e| &self.edges[e])
    }

    /// Deterministic topological order: start first, end last, ties by node id.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Qubit carried by each output port of each node.
    pub fn wire_labels(&self) -> Vec<Vec<usize>> {
        let mut labels: Vec<Vec<usize>> = self
            .nodes
            .iter()
            .map(|k| vec![usize::MAX; k.out_ports(self.num_qubits)])
            .collect();
        for &v in &self.order {
            match self.nodes[v] {
                NodeKind::Start => {
                    for (port, l) in labels[v].iter_mut().enumerate() {
                        *l = port;
                    }
                }
                NodeKind::End => {}
                NodeKind::Gate(_) => {
                    for (port, &e) in self.inputs[v].iter().enumerate() {
                        let edge = self.edges[e];
                        labels[v][port] = labels[edge.src][edge.src_port];
                    }
                }
            }
        }
        labels
    }

    pub fn to_json(&self) -> String {
        let doc = DagJson {
            nodes: self
                .nodes
                .iter()
                .map(|k| NodeJson {
                    kind: k.label().to_string(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| [e.src, e.src_port, e.dst, e.dst_port])
                .collect(),
        };
        serde_json::to_string(&doc).expect("dag serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DagError> {
        let doc: DagJson = serde_json::from_str(text).map_err(|e| DagError::Json(e.to_string()))?;
        let nodes = doc
            .nodes
            .iter()
            .map(|n| match n.kind.as_str() {
                "start" => Ok(NodeKind::Start),
                "end" => Ok(NodeKind::End),
                other => other
                    .parse::<GateKind>()
                    .map(NodeKind::Gate)
                    .map_err(|e| DagError::Json(e.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let edges = doc
            .edges
            .iter()
            .map(|&[a, b, c, d]| Edge::new(a, b, c, d))
            .collect();
        Self::from_parts(nodes, edges)
    }
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    #[serde(rename = "type")]
    kind: String,
}

#[derive(Serialize, Deserialize)]
struct DagJson {
    nodes: Vec<NodeJson>,
    edges: Vec<[usize; 4]>,
}

/// Kahn's algorithm with a min-heap so ties resolve to the lowest node id.
pub fn topological_order(n_nodes: usize, edges: &[Edge]) -> Result<Vec<usize>, DagError> {
    let mut indegree = vec![0usize; n_nodes];
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    for e in edges {
        indegree[e.dst] += 1;
        succ[e.src].push(e.dst);
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n_nodes)
        .filter(|&v| indegree[v] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n_nodes);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &w in &succ[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(Reverse(w));
            }
        }
    }
    if order.len() != n_nodes {
        return Err(DagError::CycleDetected);
    }
    Ok(order)
}

/// One gate node per application, in circuit order, wired to the current
/// dangling output of each operand qubit.
pub fn circuit_to_dag(circuit: &QuantumCircuit) -> CircuitDag {
    let n = circuit.num_qubits();
    let mut nodes = Vec::with_capacity(circuit.len() + 2);
    let mut edges = Vec::new();
    nodes.push(NodeKind::Start);
    // dangling[q] = (node, output port) currently carrying qubit q
    let mut dangling: Vec<(usize, usize)> = (0..n).map(|q| (0, q)).collect();
    for g in circuit.gates() {
        let id = nodes.len();
        nodes.push(NodeKind::Gate(g.kind));
        for (port, &q) in g.qubits.iter().enumerate() {
            let (src, src_port) = dangling[q];
            edges.push(Edge::new(src, src_port, id, port));
            dangling[q] = (id, port);
        }
    }
    let end = nodes.len();
    nodes.push(NodeKind::End);
    for (q, &(src, src_port)) in dangling.iter().enumerate() {
        edges.push(Edge::new(src, src_port, end, q));
    }
    CircuitDag::from_parts(nodes, edges).expect("circuit_to_dag builds a valid DAG")
}

/// Emits gates in topological order with operands recovered from wire labels.
pub fn dag_to_circuit(dag: &CircuitDag) -> QuantumCircuit {
    let labels = dag.wire_labels();
    let mut gates = Vec::with_capacity(dag.gate_count());
    for &v in dag.topological_order() {
        if let NodeKind::Gate(kind) = dag.nodes()[v] {
            let qubits = dag
                .in_edges(v)
                .map(|e| labels[e.src][e.src_port])
                .collect::<Vec<_>>();
            gates.push(GateApplication { kind, qubits });
        }
    }
    QuantumCircuit::new(dag.num_qubits(), gates).expect("valid DAG yields a valid circuit")
}
