//! The experiment stages: generate, train, eval, baseline and report.
//!
//! Layout under the output root:
//!
//! ```text
//! data/q{n}_g{g}/c0000.qc, split.json
//! checkpoints/{variant}/q{n}_g{g}/run{r}/  model files, history.json, meta.json
//! results/eval_{variant}.csv, baseline.csv
//! results/candidates/{variant}_q{n}_g{g}_run{r}.json
//! report/summary.csv, variants.csv, {variant}_gate.svg, {variant}_depth.svg
//! ```

use crate::config::ExperimentConfig;
use crate::dataset::{self, SizeData};
use crate::report::{self, ResultRow};
use crate::{derive_seed, svg, BenchError};
use qcgen_core::transpile::reduction_pct;
use qcgen_core::{density_matrix, density_mse, simulate, transpile, OptLevel, QuantumCircuit};
use qcgen_models::search::{SearchError, SourceMetrics};
use qcgen_models::{reconstruct, train, EvalContext, Model, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub fn checkpoint_dir(root: &Path, variant: Variant, qubits: usize, gates: usize, run: usize) -> PathBuf {
    root.join("checkpoints")
        .join(variant.name())
        .join(format!("q{qubits}_g{gates}"))
        .join(format!("run{run}"))
}

fn variant_index(v: Variant) -> u64 {
    Variant::ALL.iter().position(|&x| x == v).expect("known variant") as u64
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BenchError> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| BenchError::io(path, e))
}

/// Reduction against the transpiled original; an empty original counts as 0%.
pub fn reduction_pct_or_zero(original: usize, new: usize) -> f64 {
    reduction_pct(original, new).unwrap_or(0.0)
}

fn eval_context(cfg: &ExperimentConfig) -> EvalContext {
    EvalContext::new(&cfg.map, cfg.opt_level())
}

/// Identifies a trained checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub variant: Variant,
    pub qubits: usize,
    pub gates: usize,
    pub run: usize,
    pub seed: u64,
    pub train_circuits: usize,
    pub final_val_mse: Option<f64>,
}

pub fn cmd_generate(cfg: &ExperimentConfig, root: &Path) -> Result<usize, BenchError> {
    dataset::generate(cfg, root)
}

fn sizes(cfg: &ExperimentConfig) -> impl Iterator<Item = (usize, usize)> + '_ {
    cfg.qubit_counts
        .iter()
        .flat_map(|&q| cfg.gate_counts.iter().map(move |&g| (q, g)))
}

fn load_sizes(cfg: &ExperimentConfig, root: &Path) -> Result<Vec<SizeData>, BenchError> {
    sizes(cfg).map(|(q, g)| dataset::load_size(root, q, g)).collect()
}

/// Trains every (variant, size, run); the test split is only monitored.
pub fn cmd_train(cfg: &ExperimentConfig, root: &Path) -> Result<Vec<RunMeta>, BenchError> {
    cfg.validate()?;
    let data = load_sizes(cfg, root)?;
    let mut out = Vec::new();
    for &variant in &cfg.variants {
        for d in &data {
            let train_set = d.train_circuits();
            let test_set = d.test_circuits();
            for run in 0..cfg.runs_per_model {
                let seed = derive_seed(
                    cfg.seed,
                    &[3, variant_index(variant), d.qubits as u64, d.gates as u64, run as u64],
                );
                let tc = cfg.train.to_train_config(variant, seed);
                let (model, history) = train(&train_set, &test_set, &tc, &cfg.model)?;
                let dir = checkpoint_dir(root, variant, d.qubits, d.gates, run);
                model.save(&dir)?;
                write_json(&dir.join("history.json"), &history)?;
                let meta = RunMeta {
                    variant,
                    qubits: d.qubits,
                    gates: d.gates,
                    run,
                    seed,
                    train_circuits: train_set.len(),
                    final_val_mse: history.last().and_then(|e| e.val_mse),
                };
                write_json(&dir.join("meta.json"), &meta)?;
                out.push(meta);
            }
        }
    }
    Ok(out)
}

pub fn load_checkpoint(dir: &Path) -> Result<Model, BenchError> {
    if !dir.join("manifest.json").is_file() {
        return Err(BenchError::MissingCheckpoint(dir.to_path_buf()));
    }
    Ok(Model::load(dir)?)
}

/// Stored text of one evaluated candidate, so its MSE can be recomputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredCandidate {
    pub circuit: usize,
    pub candidate: usize,
    pub text: String,
}

pub fn candidates_path(root: &Path, variant: Variant, qubits: usize, gates: usize, run: usize) -> PathBuf {
    root.join("results")
        .join("candidates")
        .join(format!("{}_q{qubits}_g{gates}_run{run}.json", variant.name()))
}

pub fn eval_path(root: &Path, variant: Variant) -> PathBuf {
    root.join("results").join(format!("eval_{}.csv", variant.name()))
}

/// Reconstructs every test circuit `encodings × decodings` times with each
/// trained checkpoint. Writes one CSV per variant.
pub fn cmd_eval(cfg: &ExperimentConfig, root: &Path) -> Result<Vec<ResultRow>, BenchError> {
    cfg.validate()?;
    let ctx = eval_context(cfg);
    let data = load_sizes(cfg, root)?;
    let cand_dir = root.join("results").join("candidates");
    fs::create_dir_all(&cand_dir).map_err(|e| BenchError::io(&cand_dir, e))?;
    let mut all = Vec::new();
    for &variant in &cfg.variants {
        let mut rows = Vec::new();
        for d in &data {
            for run in 0..cfg.runs_per_model {
                let model = load_checkpoint(&checkpoint_dir(root, variant, d.qubits, d.gates, run))?;
                let mut stored = Vec::new();
                for (id, circuit) in &d.test {
                    let src = SourceMetrics::measure(circuit, &ctx)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                        cfg.seed,
                        &[4, variant_index(variant), d.qubits as u64, d.gates as u64, run as u64, *id as u64],
                    ));
                    let cands = reconstruct(circuit, &model, &ctx, cfg.encodings, cfg.decodings, &mut rng)?;
                    for (k, c) in cands.iter().enumerate() {
                        rows.push(ResultRow {
                            variant: variant.name().to_string(),
                            qubits: d.qubits,
                            gates: d.gates,
                            run,
                            circuit: *id,
                            candidate: k,
                            gate_red_pct: reduction_pct_or_zero(src.transpiled_gates, c.transpiled_gates),
                            depth_red_pct: reduction_pct_or_zero(src.transpiled_depth, c.transpiled_depth),
                            density_mse: c.density_mse,
                        });
                        stored.push(StoredCandidate {
                            circuit: *id,
                            candidate: k,
                            text: c.circuit.to_text(),
                        });
                    }
                }
                write_json(&candidates_path(root, variant, d.qubits, d.gates, run), &stored)?;
            }
        }
        report::write_csv(&eval_path(root, variant), &rows)?;
        all.extend(rows);
    }
    Ok(all)
}

/// Rule-based path only: the circuit transpiled at opt level 1 against the
/// same circuit at opt level 0, on the configured map.
pub fn baseline_row(circuit: &QuantumCircuit, map: &str) -> Result<(f64, f64, f64), BenchError> {
    let ctx0 = EvalContext::new(map, OptLevel::None);
    let cm = ctx0.coupling_map(circuit.num_qubits())?;
    let plain = transpile(circuit, &cm, OptLevel::None).map_err(SearchError::from)?;
    let opt = transpile(circuit, &cm, OptLevel::Light).map_err(SearchError::from)?;
    let sim_err = |e| BenchError::Search(SearchError::Sim(e));
    let src = density_matrix(&simulate(circuit).map_err(sim_err)?);
    let got = density_matrix(&opt.logical_state().map_err(sim_err)?);
    let mse = density_mse(&src, &got).map_err(sim_err)?;
    Ok((
        reduction_pct_or_zero(plain.transpiled_gate_count, opt.transpiled_gate_count),
        reduction_pct_or_zero(plain.depth, opt.depth),
        mse,
    ))
}

pub fn baseline_path(root: &Path) -> PathBuf {
    root.join("results").join("baseline.csv")
}

pub fn cmd_baseline(cfg: &ExperimentConfig, root: &Path) -> Result<Vec<ResultRow>, BenchError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for d in load_sizes(cfg, root)? {
        for (id, circuit) in &d.test {
            let (g, dep, mse) = baseline_row(circuit, &cfg.map)?;
            rows.push(ResultRow {
                variant: "baseline".into(),
                qubits: d.qubits,
                gates: d.gates,
                run: 0,
                circuit: *id,
                candidate: 0,
                gate_red_pct: g,
                depth_red_pct: dep,
                density_mse: mse,
            });
        }
    }
    report::write_csv(&baseline_path(root), &rows)?;
    Ok(rows)
}

/// Every result CSV under `results/`, in file name order.
pub fn collect_rows(root: &Path) -> Result<Vec<ResultRow>, BenchError> {
    let dir = root.join("results");
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| BenchError::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut rows = Vec::new();
    for f in files {
        rows.extend(report::read_csv(&f)?);
    }
    Ok(rows)
}

/// Summary CSVs plus gate and depth box plots per variant. Returns the
/// written paths.
pub fn cmd_report(root: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let rows = collect_rows(root)?;
    if rows.is_empty() {
        return Err(BenchError::Validation(format!(
            "no result rows under {}",
            root.join("results").display()
        )));
    }
    let dir = root.join("report");
    fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
    let groups = report::group_summaries(&rows);
    let variants = report::variant_summaries(&groups);
    let mut written = vec![dir.join("summary.csv"), dir.join("variants.csv")];
    report::write_group_csv(&written[0], &groups)?;
    report::write_variant_csv(&written[1], &variants)?;
    for v in &variants {
        let mine: Vec<_> = groups.iter().filter(|g| g.variant == v.variant).collect();
        for (what, pick) in [
            ("gate", (|g: &report::GroupSummary| g.gate_red) as fn(&report::GroupSummary) -> report::Dist),
            ("depth", |g: &report::GroupSummary| g.depth_red),
        ] {
            let boxes: Vec<_> = mine
                .iter()
                .map(|g| (format!("{}q/{}g", g.qubits, g.gates), pick(g)))
                .collect();
            let title = format!("{}: {what} reduction per circuit size", v.variant);
            let path = dir.join(format!("{}_{what}.svg", v.variant));
            fs::write(&path, svg::box_plot(&title, "reduction (%)", &boxes)).map_err(|e| BenchError::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}
