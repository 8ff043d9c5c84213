//! A model is one encoder variant plus the shared constrained decoder, with
//! all weights in a single [`ParamStore`].

use crate::config::{ModelConfig, Variant, MAX_QUBITS};
use crate::decoder::{self, DecodeMode};
use crate::encoder;
use crate::params::{ParamId, ParamStore, Tensor};
use crate::tape::{Tape, Var};
use qcgen_core::dag::NODE_TYPE_COUNT;
use qcgen_core::{CircuitDag, QuantumCircuit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("{0} qubits exceeds the model limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("dataset mixes qubit counts {0} and {1}")]
    MixedQubitCounts(usize, usize),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) struct GruDir {
    pub emb: ParamId,
    pub wh: ParamId,
    pub bh: ParamId,
    pub gate_w: ParamId,
    pub gate_b: ParamId,
    pub map_w: ParamId,
}

pub(crate) enum EncoderIds {
    Gru {
        fwd: GruDir,
        rev: Option<GruDir>,
    },
    Gcn {
        self_tbl: ParamId,
        type_tbl: ParamId,
        nb_w: ParamId,
        b: ParamId,
    },
    DeepGmg {
        emb: ParamId,
        port_src: ParamId,
        port_dst: ParamId,
        msg_w: ParamId,
        msg_b: ParamId,
        wi: ParamId,
        bi: ParamId,
        wh: ParamId,
        bh: ParamId,
    },
}

pub(crate) struct HeadIds {
    pub mu_w: ParamId,
    pub mu_b: ParamId,
    pub lv_w: ParamId,
    pub lv_b: ParamId,
}

pub(crate) struct DecoderIds {
    pub z_w: ParamId,
    pub z_b: ParamId,
    pub emb: ParamId,
    pub node_wh: ParamId,
    pub node_bh: ParamId,
    pub agg_gate_w: ParamId,
    pub agg_gate_b: ParamId,
    pub agg_map_w: ParamId,
    pub graph_wi: ParamId,
    pub graph_bi: ParamId,
    pub graph_wh: ParamId,
    pub graph_bh: ParamId,
    pub add_w1: ParamId,
    pub add_b1: ParamId,
    pub add_w2: ParamId,
    pub add_b2: ParamId,
    pub edge_src_w: ParamId,
    pub edge_src_port: ParamId,
    pub edge_qubit: ParamId,
    pub edge_ctx_w: ParamId,
    pub edge_type: ParamId,
    pub edge_port: ParamId,
    pub edge_b: ParamId,
    pub edge_v: ParamId,
}

pub(crate) struct Ids {
    pub enc: EncoderIds,
    pub heads: HeadIds,
    pub dec: DecoderIds,
}

/// (name, rows, cols, fan_in) for every tensor of a variant, in creation order.
fn layout(variant: Variant, cfg: &ModelConfig) -> Vec<(String, usize, usize, usize)> {
    let (h, d, e, p, t) = (
        cfg.hidden_dim,
        cfg.latent_dim,
        cfg.edge_feature_dim,
        MAX_QUBITS,
        NODE_TYPE_COUNT,
    );
    let mut l: Vec<(String, usize, usize, usize)> = Vec::new();
    let mut add = |name: &str, rows, cols, fan| l.push((name.to_string(), rows, cols, fan));
    let readout = match variant {
        Variant::Gru => {
            let dirs: &[&str] = if cfg.bidirectional { &["fwd", "rev"] } else { &["fwd"] };
            for dir in dirs {
                add(&format!("enc.{dir}.emb"), t, 3 * h, t);
                add(&format!("enc.{dir}.wh"), 3 * h, h, h);
                add(&format!("enc.{dir}.bh"), 3 * h, 1, h);
                add(&format!("enc.{dir}.gate_w"), h, h, h);
                add(&format!("enc.{dir}.gate_b"), h, 1, h);
                add(&format!("enc.{dir}.map_w"), h, h, h);
            }
            h * dirs.len()
        }
        Variant::Gcn => {
            add("enc.gcn.self", t, h, t);
            add("enc.gcn.type", t, h, t);
            add("enc.gcn.nb_w", h, h, h);
            add("enc.gcn.b", h, 1, h);
            h
        }
        Variant::DeepGmg => {
            add("enc.dg.emb", t, h, t);
            add("enc.dg.port_src", p, e, p);
            add("enc.dg.port_dst", p, e, p);
            add("enc.dg.msg_w", h, 2 * h + e, 2 * h + e);
            add("enc.dg.msg_b", h, 1, 2 * h + e);
            add("enc.dg.wi", 3 * h, h, h);
            add("enc.dg.bi", 3 * h, 1, h);
            add("enc.dg.wh", 3 * h, h, h);
            add("enc.dg.bh", 3 * h, 1, h);
            h
        }
    };
    add("enc.mu_w", d, readout, readout);
    add("enc.mu_b", d, 1, readout);
    add("enc.lv_w", d, readout, readout);
    add("enc.lv_b", d, 1, readout);

    add("dec.z_w", h, d, d);
    add("dec.z_b", h, 1, d);
    add("dec.emb", t, 3 * h, t);
    add("dec.node_wh", 3 * h, h, h);
    add("dec.node_bh", 3 * h, 1, h);
    add("dec.agg_gate_w", h, h, h);
    add("dec.agg_gate_b", h, 1, h);
    add("dec.agg_map_w", h, h, h);
    add("dec.graph_wi", 3 * h, h, h);
    add("dec.graph_bi", 3 * h, 1, h);
    add("dec.graph_wh", 3 * h, h, h);
    add("dec.graph_bh", 3 * h, 1, h);
    add("dec.add_w1", h, h, h);
    add("dec.add_b1", h, 1, h);
    add("dec.add_w2", t, h, h);
    add("dec.add_b2", t, 1, h);
    add("dec.edge_src_w", h, h, h);
    add("dec.edge_src_port", p, h, p);
    add("dec.edge_qubit", p, h, p);
    add("dec.edge_ctx_w", h, h, h);
    add("dec.edge_type", t, h, t);
    add("dec.edge_port", 2, h, 2);
    add("dec.edge_b", h, 1, h);
    add("dec.edge_v", 1, h, h);
    l
}

impl Ids {
    fn resolve(store: &ParamStore, variant: Variant, cfg: &ModelConfig) -> Result<Ids, String> {
        for (name, rows, cols, _) in layout(variant, cfg) {
            let id = store.id(&name).ok_or_else(|| format!("missing tensor {name}"))?;
            let t = store.tensor(id);
            if (t.rows, t.cols) != (rows, cols) {
                return Err(format!(
                    "tensor {name} has shape {}x{}, expected {rows}x{cols}",
                    t.rows, t.cols
                ));
            }
        }
        if store.tensors().len() != layout(variant, cfg).len() {
            return Err("unexpected extra tensors".into());
        }
        let g = |n: &str| store.id(n).expect("checked above");
        let dir = |d: &str| GruDir {
            emb: g(&format!("enc.{d}.emb")),
            wh: g(&format!("enc.{d}.wh")),
            bh: g(&format!("enc.{d}.bh")),
            gate_w: g(&format!("enc.{d}.gate_w")),
            gate_b: g(&format!("enc.{d}.gate_b")),
            map_w: g(&format!("enc.{d}.map_w")),
        };
        let enc = match variant {
            Variant::Gru => EncoderIds::Gru {
                fwd: dir("fwd"),
                rev: cfg.bidirectional.then(|| dir("rev")),
            },
            Variant::Gcn => EncoderIds::Gcn {
                self_tbl: g("enc.gcn.self"),
                type_tbl: g("enc.gcn.type"),
                nb_w: g("enc.gcn.nb_w"),
                b: g("enc.gcn.b"),
            },
            Variant::DeepGmg => EncoderIds::DeepGmg {
                emb: g("enc.dg.emb"),
                port_src: g("enc.dg.port_src"),
                port_dst: g("enc.dg.port_dst"),
                msg_w: g("enc.dg.msg_w"),
                msg_b: g("enc.dg.msg_b"),
                wi: g("enc.dg.wi"),
                bi: g("enc.dg.bi"),
                wh: g("enc.dg.wh"),
                bh: g("enc.dg.bh"),
            },
        };
        Ok(Ids {
            enc,
            heads: HeadIds {
                mu_w: g("enc.mu_w"),
                mu_b: g("enc.mu_b"),
                lv_w: g("enc.lv_w"),
                lv_b: g("enc.lv_b"),
            },
            dec: DecoderIds {
                z_w: g("dec.z_w"),
                z_b: g("dec.z_b"),
                emb: g("dec.emb"),
                node_wh: g("dec.node_wh"),
                node_bh: g("dec.node_bh"),
                agg_gate_w: g("dec.agg_gate_w"),
                agg_gate_b: g("dec.agg_gate_b"),
                agg_map_w: g("dec.agg_map_w"),
                graph_wi: g("dec.graph_wi"),
                graph_bi: g("dec.graph_bi"),
                graph_wh: g("dec.graph_wh"),
                graph_bh: g("dec.graph_bh"),
                add_w1: g("dec.add_w1"),
                add_b1: g("dec.add_b1"),
                add_w2: g("dec.add_w2"),
                add_b2: g("dec.add_b2"),
                edge_src_w: g("dec.edge_src_w"),
                edge_src_port: g("dec.edge_src_port"),
                edge_qubit: g("dec.edge_qubit"),
                edge_ctx_w: g("dec.edge_ctx_w"),
                edge_type: g("dec.edge_type"),
                edge_port: g("dec.edge_port"),
                edge_b: g("dec.edge_b"),
                edge_v: g("dec.edge_v"),
            },
        })
    }
}

/// Scalar parts of one training objective evaluation.
#[derive(Debug, Clone, Copy)]
pub struct LossParts {
    pub total: Var,
    pub structural: f64,
    pub kld: f64,
}

pub struct Model {
    variant: Variant,
    config: ModelConfig,
    pub(crate) params: ParamStore,
    pub(crate) ids: Ids,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("variant", &self.variant)
            .field("config", &self.config)
            .field("scalars", &self.params.num_scalars())
            .finish()
    }
}

impl Clone for Model {
    fn clone(&self) -> Self {
        Self::from_params(self.variant, self.config.clone(), self.params.clone())
            .expect("a valid model stays valid")
    }
}

impl Model {
    /// Fresh weights drawn from a seeded generator.
    pub fn new(variant: Variant, config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate().map_err(ModelError::InvalidConfig)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::default();
        for (name, rows, cols, fan) in layout(variant, &config) {
            store.add(&name, rows, cols, fan, &mut rng);
        }
        Self::from_params(variant, config, store)
    }

    pub fn from_params(
        variant: Variant,
        config: ModelConfig,
        params: ParamStore,
    ) -> Result<Self, ModelError> {
        config.validate().map_err(ModelError::InvalidConfig)?;
        let ids = Ids::resolve(&params, variant, &config).map_err(ModelError::Checkpoint)?;
        Ok(Self {
            variant,
            config,
            params,
            ids,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn tape(&self) -> Tape<'_> {
        Tape::new(&self.params)
    }

    fn check_qubits(n: usize) -> Result<(), ModelError> {
        if n > MAX_QUBITS {
            Err(ModelError::TooManyQubits(n))
        } else {
            Ok(())
        }
    }

    /// (mu, logvar) nodes on `tape`.
    pub fn encode_on(&self, tape: &mut Tape<'_>, dag: &CircuitDag) -> Result<(Var, Var), ModelError> {
        Self::check_qubits(dag.num_qubits())?;
        let readout = encoder::readout(tape, &self.ids.enc, &self.config, dag);
        let h = &self.ids.heads;
        let mu = tape.affine(h.mu_w, Some(h.mu_b), readout);
        let lv = tape.affine(h.lv_w, Some(h.lv_b), readout);
        Ok((mu, lv))
    }

    pub fn encode(&self, dag: &CircuitDag) -> Result<(Vec<f64>, Vec<f64>), ModelError> {
        let mut tape = self.tape();
        let (mu, lv) = self.encode_on(&mut tape, dag)?;
        Ok((tape.value(mu).to_vec(), tape.value(lv).to_vec()))
    }

    /// Always returns a structurally valid DAG with at most `max_gates` gates.
    pub fn decode<R: Rng + ?Sized>(
        &self,
        z: &[f64],
        n_qubits: usize,
        max_gates: usize,
        mode: DecodeMode,
        rng: &mut R,
    ) -> Result<CircuitDag, ModelError> {
        Self::check_qubits(n_qubits)?;
        if n_qubits == 0 {
            return Err(ModelError::InvalidConfig("decode needs at least one qubit".into()));
        }
        assert_eq!(z.len(), self.config.latent_dim, "latent length");
        let mut tape = self.tape();
        let zv = tape.constant(z.to_vec());
        Ok(decoder::decode(
            &mut tape,
            &self.ids.dec,
            zv,
            n_qubits,
            max_gates,
            mode,
            self.config.temperature,
            rng,
        ))
    }

    /// Teacher-forced negative log-likelihood of `dag` given latent `z`.
    pub fn structural_loss_on(&self, tape: &mut Tape<'_>, z: Var, dag: &CircuitDag) -> Result<Var, ModelError> {
        Self::check_qubits(dag.num_qubits())?;
        Ok(decoder::teacher_forced_nll(tape, &self.ids.dec, z, dag))
    }

    /// `structural + beta * kld` with `z = mu + exp(logvar/2) * eps`.
    pub fn loss_on(
        &self,
        tape: &mut Tape<'_>,
        dag: &CircuitDag,
        eps: &[f64],
        beta: f64,
    ) -> Result<LossParts, ModelError> {
        let (mu, lv) = self.encode_on(tape, dag)?;
        let z = crate::latent::reparameterize_on(tape, mu, lv, eps);
        let s = self.structural_loss_on(tape, z, dag)?;
        let k = tape.kld(mu, lv);
        let kb = tape.scale(k, beta);
        let total = tape.add(s, kb);
        Ok(LossParts {
            total,
            structural: tape.scalar(s),
            kld: tape.scalar(k),
        })
    }

    /// Encodes to the mean and decodes greedily under the source gate budget.
    pub fn reconstruct_greedy(&self, circuit: &QuantumCircuit) -> Result<QuantumCircuit, ModelError> {
        let dag = qcgen_core::circuit_to_dag(circuit);
        let (mu, _) = self.encode(&dag)?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = self.decode(&mu, circuit.num_qubits(), circuit.len(), DecodeMode::Greedy, &mut rng)?;
        Ok(qcgen_core::dag_to_circuit(&out))
    }

    /// Writes `manifest.json` plus one little-endian f32 file per tensor.
    pub fn save(&self, dir: &Path) -> Result<(), ModelError> {
        fs::create_dir_all(dir)?;
        let mut entries = Vec::new();
        for (i, t) in self.params.tensors().iter().enumerate() {
            let file = format!("{i:03}_{}.bin", t.name);
            let mut bytes = Vec::with_capacity(t.data.len() * 4);
            for &x in &t.data {
                bytes.extend_from_slice(&(x as f32).to_le_bytes());
            }
            fs::write(dir.join(&file), bytes)?;
            entries.push(TensorEntry {
                name: t.name.clone(),
                shape: [t.rows, t.cols],
                file,
            });
        }
        let manifest = Manifest {
            variant: self.variant,
            config: self.config.clone(),
            tensors: entries,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, ModelError> {
        let text = fs::read_to_string(dir.join("manifest.json"))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        let mut store = ParamStore::default();
        for e in manifest.tensors {
            let bytes = fs::read(dir.join(&e.file))?;
            let [rows, cols] = e.shape;
            if bytes.len() != rows * cols * 4 {
                return Err(ModelError::Checkpoint(format!(
                    "{} holds {} bytes, expected {}",
                    e.file,
                    bytes.len(),
                    rows * cols * 4
                )));
            }
            let data = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            store.insert(Tensor {
                name: e.name,
                rows,
                cols,
                data,
            });
        }
        Self::from_params(manifest.variant, manifest.config, store)
    }
}

#[derive(Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    shape: [usize; 2],
    file: String,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    variant: Variant,
    config: ModelConfig,
    tensors: Vec<TensorEntry>,
}
