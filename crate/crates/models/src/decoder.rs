//! Sequential decoder that can only build valid circuit DAGs.
//!
//! Dangling output ports wait in a queue in insertion order. Each new gate
//! binds its input ports to distinct queue entries, and End takes whatever is
//! left in qubit order. Because every qubit labels exactly one queued slot,
//! every reachable state corresponds to a valid partial circuit.

use crate::model::DecoderIds;
use crate::tape::{masked_softmax, Tape, Var};
use qcgen_core::dag::{END_TYPE, NODE_TYPE_COUNT, START_TYPE};
use qcgen_core::{CircuitDag, Edge, GateKind, NodeKind};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    Greedy,
    Sample,
}

/// Node types the add-node head may pick.
pub fn type_mask(n_qubits: usize, budget_exhausted: bool) -> [bool; NODE_TYPE_COUNT] {
    let mut m = [false; NODE_TYPE_COUNT];
    m[END_TYPE] = true;
    if !budget_exhausted {
        for k in GateKind::ALL {
            m[k.index()] = k.arity() == 1 || n_qubits >= 2;
        }
    }
    debug_assert!(!m[START_TYPE]);
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    node: usize,
    port: usize,
    qubit: usize,
}

struct Run<'a, 't, 'p> {
    tape: &'t mut Tape<'p>,
    ids: &'a DecoderIds,
    g: Var,
    states: Vec<Var>,
    src_proj: Vec<Var>,
    queue: Vec<Slot>,
}

impl<'a, 't, 'p> Run<'a, 't, 'p> {
    fn start(tape: &'t mut Tape<'p>, ids: &'a DecoderIds, z: Var, n_qubits: usize) -> Self {
        let g0 = tape.affine(ids.z_w, Some(ids.z_b), z);
        let g0 = tape.tanh(g0);
        let mut run = Self {
            tape,
            ids,
            g: g0,
            states: Vec::new(),
            src_proj: Vec::new(),
            queue: Vec::new(),
        };
        run.push_node(START_TYPE, g0);
        run.queue = (0..n_qubits)
            .map(|q| Slot {
                node: 0,
                port: q,
                qubit: q,
            })
            .collect();
        run
    }

    /// Adds a node whose aggregated input is `agg`, then advances the graph state.
    fn push_node(&mut self, type_index: usize, agg: Var) {
        let ids = self.ids;
        let t = &mut *self.tape;
        let gi = t.row(ids.emb, type_index);
        let gh = t.affine(ids.node_wh, Some(ids.node_bh), agg);
        let h = t.gru(gi, gh, agg);
        let gx = t.affine(ids.graph_wi, Some(ids.graph_bi), h);
        let gg = t.affine(ids.graph_wh, Some(ids.graph_bh), self.g);
        self.g = t.gru(gx, gg, self.g);
        self.src_proj.push(t.matvec(ids.edge_src_w, h));
        self.states.push(h);
    }

    fn node_logits(&mut self) -> Var {
        let ids = self.ids;
        let t = &mut *self.tape;
        let a = t.affine(ids.add_w1, Some(ids.add_b1), self.g);
        let a = t.tanh(a);
        t.affine(ids.add_w2, Some(ids.add_b2), a)
    }

    /// One score per queued slot for binding input `port` of a `kind` gate.
    fn slot_logits(&mut self, kind: GateKind, port: usize) -> Var {
        let ids = self.ids;
        let t = &mut *self.tape;
        let c = t.affine(ids.edge_ctx_w, Some(ids.edge_b), self.g);
        let ty = t.row(ids.edge_type, kind.index());
        let pe = t.row(ids.edge_port, port);
        let ctx = t.sum(&[c, ty, pe]);
        let v = t.param(ids.edge_v);
        let scores: Vec<Var> = self
            .queue
            .iter()
            .map(|s| {
                let sp = t.row(ids.edge_src_port, s.port);
                let q = t.row(ids.edge_qubit, s.qubit);
                let pre = t.sum(&[self.src_proj[s.node], sp, q, ctx]);
                let a = t.tanh(pre);
                t.dot(v, a)
            })
            .collect();
        t.concat(&scores)
    }

    /// Binds the chosen queue entries (in port order) to a new gate node.
    fn add_gate(&mut self, kind: GateKind, chosen: &[usize]) -> Vec<Slot> {
        let ids = self.ids;
        let srcs: Vec<Slot> = chosen.iter().map(|&i| self.queue[i]).collect();
        debug_assert!(srcs.len() < 2 || srcs[0].qubit != srcs[1].qubit);
        let parts: Vec<Var> = srcs
            .iter()
            .map(|s| {
                let t = &mut *self.tape;
                let h = self.states[s.node];
                let g = t.affine(ids.agg_gate_w, Some(ids.agg_gate_b), h);
                let g = t.sigmoid(g);
                let m = t.matvec(ids.agg_map_w, h);
                t.mul(g, m)
            })
            .collect();
        let agg = self.tape.sum(&parts);
        self.push_node(kind.index(), agg);
        let node = self.states.len() - 1;
        let mut idx = chosen.to_vec();
        idx.sort_unstable_by(|a, b| b.cmp(a));
        for i in idx {
            self.queue.remove(i);
        }
        for (p, s) in srcs.iter().enumerate() {
            self.queue.push(Slot {
                node,
                port: p,
                qubit: s.qubit,
            });
        }
        srcs
    }
}

fn pick<R: Rng + ?Sized>(logits: &[f64], allowed: &[bool], mode: DecodeMode, temperature: f64, rng: &mut R) -> usize {
    match mode {
        DecodeMode::Greedy => {
            let mut best = None;
            for (i, (&l, &a)) in logits.iter().zip(allowed).enumerate() {
                if a && best.is_none_or(|(_, bl)| l > bl) {
                    best = Some((i, l));
                }
            }
            best.expect("at least one allowed choice").0
        }
        DecodeMode::Sample => {
            let p = masked_softmax(logits, allowed, temperature);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut last = 0;
            for (i, &pi) in p.iter().enumerate() {
                if allowed[i] {
                    acc += pi;
                    last = i;
                    if u < acc {
                        return i;
                    }
                }
            }
            last
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn decode<R: Rng + ?Sized>(
    tape: &mut Tape<'_>,
    ids: &DecoderIds,
    z: Var,
    n_qubits: usize,
    max_gates: usize,
    mode: DecodeMode,
    temperature: f64,
    rng: &mut R,
) -> CircuitDag {
    let mut run = Run::start(tape, ids, z, n_qubits);
    let mut nodes = vec![NodeKind::Start];
    let mut edges = Vec::new();
    loop {
        let gates = nodes.len() - 1;
        let mask = type_mask(n_qubits, gates >= max_gates);
        let logits = run.node_logits();
        let choice = pick(run.tape.value(logits), &mask, mode, temperature, rng);
        if choice == END_TYPE {
            break;
        }
        let kind = GateKind::from_index(choice).expect("mask admits only gates and End");
        let mut chosen = Vec::with_capacity(kind.arity());
        for port in 0..kind.arity() {
            let logits = run.slot_logits(kind, port);
            let allowed: Vec<bool> = (0..run.queue.len()).map(|i| !chosen.contains(&i)).collect();
            chosen.push(pick(run.tape.value(logits), &allowed, mode, temperature, rng));
        }
        let node = nodes.len();
        for (p, s) in run.add_gate(kind, &chosen).into_iter().enumerate() {
            edges.push(Edge::new(s.node, s.port, node, p));
        }
        nodes.push(NodeKind::Gate(kind));
    }
    let end = nodes.len();
    nodes.push(NodeKind::End);
    let mut rest = run.queue.clone();
    rest.sort_by_key(|s| s.qubit);
    for s in rest {
        edges.push(Edge::new(s.node, s.port, end, s.qubit));
    }
    CircuitDag::from_parts(nodes, edges).expect("decoder only builds valid DAGs")
}

/// Sum of node-type and slot negative log-likelihoods along the true
/// topological order, plus the final End decision.
pub(crate) fn teacher_forced_nll(tape: &mut Tape<'_>, ids: &DecoderIds, z: Var, dag: &CircuitDag) -> Var {
    let n = dag.num_qubits();
    let mask = type_mask(n, false);
    let mut run = Run::start(tape, ids, z, n);
    let mut local = vec![usize::MAX; dag.nodes().len()];
    local[dag.start()] = 0;
    let mut terms = Vec::new();
    for &v in dag.topological_order() {
        let NodeKind::Gate(kind) = dag.nodes()[v] else {
            continue;
        };
        let logits = run.node_logits();
        terms.push(run.tape.nll(logits, &mask, kind.index()));
        let mut ins: Vec<&Edge> = dag.in_edges(v).collect();
        ins.sort_by_key(|e| e.dst_port);
        let mut chosen = Vec::with_capacity(ins.len());
        for e in ins {
            let src = local[e.src];
            let target = run
                .queue
                .iter()
                .position(|s| s.node == src && s.port == e.src_port)
                .expect("predecessor output is queued");
            let logits = run.slot_logits(kind, e.dst_port);
            let allowed: Vec<bool> = (0..run.queue.len()).map(|i| !chosen.contains(&i)).collect();
            terms.push(run.tape.nll(logits, &allowed, target));
            chosen.push(target);
        }
        run.add_gate(kind, &chosen);
        local[v] = run.states.len() - 1;
    }
    let logits = run.node_logits();
    terms.push(run.tape.nll(logits, &mask, END_TYPE));
    run.tape.sum(&terms)
}
