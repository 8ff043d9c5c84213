//! The three graph encoders. Each returns a readout vector that the model's
//! mu/logvar heads project into the latent space.

use crate::config::ModelConfig;
use crate::model::{EncoderIds, GruDir};
use crate::tape::{Tape, Var};
use qcgen_core::CircuitDag;
use std::cmp::Ordering;

fn cmp_values(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Sums in an order fixed by the values themselves, so the result does not
/// depend on node numbering.
pub(crate) fn canonical_sum(tape: &mut Tape<'_>, mut parts: Vec<Var>) -> Var {
    parts.sort_by(|a, b| cmp_values(tape.value(*a), tape.value(*b)));
    tape.sum(&parts)
}

fn canonical_mean(tape: &mut Tape<'_>, parts: Vec<Var>) -> Var {
    let k = parts.len() as f64;
    let s = canonical_sum(tape, parts);
    tape.scale(s, 1.0 / k)
}

pub(crate) fn readout(tape: &mut Tape<'_>, ids: &EncoderIds, cfg: &ModelConfig, dag: &CircuitDag) -> Var {
    match ids {
        EncoderIds::Gru { fwd, rev } => {
            let f = gru_pass(tape, fwd, dag, false, cfg.hidden_dim);
            match rev {
                Some(r) => {
                    let b = gru_pass(tape, r, dag, true, cfg.hidden_dim);
                    tape.concat(&[f, b])
                }
                None => f,
            }
        }
        EncoderIds::Gcn {
            self_tbl,
            type_tbl,
            nb_w,
            b,
        } => gcn(tape, [*self_tbl, *type_tbl, *nb_w, *b], dag, cfg.gcn_rounds),
        EncoderIds::DeepGmg { .. } => deepgmg(tape, ids, dag, cfg.gcn_rounds),
    }
}

/// Asynchronous pass in topological order (or its reverse). Returns the state
/// of the last node processed: End going forward, Start going backward.
fn gru_pass(tape: &mut Tape<'_>, d: &GruDir, dag: &CircuitDag, reverse: bool, h_dim: usize) -> Var {
    let n = dag.nodes().len();
    let mut order = dag.topological_order().to_vec();
    if reverse {
        order.reverse();
    }
    let mut contrib: Vec<Option<Var>> = vec![None; n];
    let mut last = None;
    for (k, &v) in order.iter().enumerate() {
        let preds: Vec<Var> = if reverse {
            dag.out_edges(v).map(|e| contrib[e.dst].expect("successor done")).collect()
        } else {
            dag.in_edges(v).map(|e| contrib[e.src].expect("predecessor done")).collect()
        };
        let agg = if preds.is_empty() {
            tape.zeros(h_dim)
        } else {
            canonical_sum(tape, preds)
        };
        let gi = tape.row(d.emb, dag.nodes()[v].type_index());
        let gh = tape.affine(d.wh, Some(d.bh), agg);
        let h = tape.gru(gi, gh, agg);
        if k + 1 < order.len() {
            let g = tape.affine(d.gate_w, Some(d.gate_b), h);
            let g = tape.sigmoid(g);
            let m = tape.matvec(d.map_w, h);
            contrib[v] = Some(tape.mul(g, m));
        }
        last = Some(h);
    }
    last.expect("a DAG has at least Start and End")
}

fn gcn(tape: &mut Tape<'_>, [self_tbl, type_tbl, nb_w, b]: [crate::params::ParamId; 4], dag: &CircuitDag, rounds: usize) -> Var {
    let n = dag.nodes().len();
    let types: Vec<usize> = dag.nodes().iter().map(|k| k.type_index()).collect();
    let bias = tape.param(b);
    let base: Vec<Var> = (0..n)
        .map(|v| {
            let r = tape.row(self_tbl, types[v]);
            tape.add(r, bias)
        })
        .collect();
    let preds: Vec<Vec<usize>> = (0..n).map(|v| dag.in_edges(v).map(|e| e.src).collect()).collect();
    let mut h: Vec<Var> = (0..n)
        .map(|v| {
            if preds[v].is_empty() {
                tape.tanh(base[v])
            } else {
                let rows: Vec<Var> = preds[v].iter().map(|&u| tape.row(type_tbl, types[u])).collect();
                let m = canonical_mean(tape, rows);
                let s = tape.add(base[v], m);
                tape.tanh(s)
            }
        })
        .collect();
    for _ in 0..rounds {
        h = (0..n)
            .map(|v| {
                if preds[v].is_empty() {
                    tape.tanh(base[v])
                } else {
                    let m = canonical_mean(tape, preds[v].iter().map(|&u| h[u]).collect());
                    let t = tape.matvec(nb_w, m);
                    let s = tape.add(base[v], t);
                    tape.tanh(s)
                }
            })
            .collect();
    }
    h[dag.end()]
}

fn deepgmg(tape: &mut Tape<'_>, ids: &EncoderIds, dag: &CircuitDag, rounds: usize) -> Var {
    let EncoderIds::DeepGmg {
        emb,
        port_src,
        port_dst,
        msg_w,
        msg_b,
        wi,
        bi,
        wh,
        bh,
    } = *ids
    else {
        unreachable!("deepgmg called with other ids")
    };
    let n = dag.nodes().len();
    let h_dim = tape.params().tensor(emb).cols;
    let mut h: Vec<Var> = (0..n)
        .map(|v| {
            let r = tape.row(emb, dag.nodes()[v].type_index());
            tape.tanh(r)
        })
        .collect();
    let edge_feat: Vec<Var> = dag
        .edges()
        .iter()
        .map(|e| {
            let a = tape.row(port_src, e.src_port);
            let b = tape.row(port_dst, e.dst_port);
            tape.add(a, b)
        })
        .collect();
    let order = dag.topological_order().to_vec();
    for _ in 0..rounds {
        // within a round, predecessors are already updated (topological sweep)
        for &v in &order {
            let msgs: Vec<Var> = dag
                .edges()
                .iter()
                .enumerate()
                .filter(|(_, e)| e.dst == v)
                .map(|(i, e)| {
                    let x = tape.concat(&[h[e.src], h[v], edge_feat[i]]);
                    let m = tape.affine(msg_w, Some(msg_b), x);
                    tape.tanh(m)
                })
                .collect();
            let m = if msgs.is_empty() {
                tape.zeros(h_dim)
            } else {
                canonical_sum(tape, msgs)
            };
            let gi = tape.affine(wi, Some(bi), m);
            let gh = tape.affine(wh, Some(bh), h[v]);
            h[v] = tape.gru(gi, gh, h[v]);
        }
    }
    h[dag.end()]
}
