use clap::{Args, Parser, Subcommand};
use qcgen_bench::config::ExperimentConfig;
use qcgen_bench::pipeline;
use qcgen_bench::{dataset, BenchError};
use qcgen_models::blocks::BlockSearch;
use qcgen_models::search::{SearchReport, SourceMetrics};
use qcgen_models::{block_optimize, perturb_search, DecodeMode, Model, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qcgen", version, about = "Train circuit autoencoders and search their latent space for shorter equivalent circuits")]
struct Cli {
    #[command(flatten)]
    opts: Overrides,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Each flag overrides the matching key of the config file.
#[derive(Args)]
struct Overrides {
    /// TOML experiment config
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Restrict to one model variant: gru, gcn or deepgmg
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Coupling map: line, ring, full, line-N or heavyhex
    #[arg(long, global = true)]
    map: Option<String>,
    /// Transpiler optimization level, 0 or 1
    #[arg(long, global = true)]
    opt: Option<u8>,
    #[arg(long = "mse-tol", global = true)]
    mse_tol: Option<f64>,
    /// Latent perturbation scale for search
    #[arg(long, global = true)]
    noise: Option<f64>,
    /// Candidates per search
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output root (config key out_dir)
    #[arg(long, global = true)]
    dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write random circuits and train/test splits
    Generate,
    /// Train every variant, size and run
    Train,
    /// Reconstruct test circuits with trained checkpoints
    Eval,
    /// Measure the rule-based optimizer alone
    Baseline,
    /// Aggregate result CSVs into summaries and box plots
    Report,
    /// Search for a shorter equivalent of one circuit file
    Optimize {
        file: PathBuf,
        /// Checkpoint directories; the one matching the circuit width is used,
        /// otherwise the circuit is optimized block by block
        #[arg(long = "checkpoint")]
        checkpoints: Vec<PathBuf>,
        /// Write the JSON report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_config(o: &Overrides) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = match &o.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(v) = &o.variant {
        let v: Variant = v.parse().map_err(|e: String| BenchError::Validation(e))?;
        cfg.variants = vec![v];
    }
    if let Some(m) = &o.map {
        cfg.map = m.clone();
    }
    if let Some(x) = o.opt {
        cfg.opt = x;
    }
    if let Some(x) = o.mse_tol {
        cfg.mse_tol = x;
    }
    if let Some(x) = o.noise {
        cfg.noise = x;
    }
    if let Some(x) = o.samples {
        cfg.samples = x;
    }
    if let Some(d) = &o.dir {
        cfg.out_dir = d.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn optimize(
    cfg: &ExperimentConfig,
    file: &Path,
    checkpoints: &[PathBuf],
    out: Option<&PathBuf>,
) -> Result<(), BenchError> {
    let circuit = dataset::read_circuit(file)?;
    let mut models = BTreeMap::new();
    for dir in checkpoints {
        let m: Model = pipeline::load_checkpoint(dir)?;
        models.insert(checkpoint_width(dir)?, m);
    }
    let ctx = qcgen_models::EvalContext::new(&cfg.map, cfg.opt_level());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let text = if let Some(model) = models.get(&circuit.num_qubits()) {
        let source = SourceMetrics::measure(&circuit, &ctx)?;
        let cands = perturb_search(&circuit, model, &ctx, cfg.samples, cfg.noise, DecodeMode::Greedy, &mut rng)?;
        SearchReport::new(source, cands, cfg.mse_tol).to_json()
    } else {
        let opts = BlockSearch {
            samples: cfg.samples,
            noise_scale: cfg.noise,
            mse_tol: cfg.mse_tol,
            ..BlockSearch::default()
        };
        let result = block_optimize(&circuit, &models, &ctx, &opts, &mut rng)?;
        let before = SourceMetrics::measure(&circuit, &ctx)?;
        let after = SourceMetrics::measure(&result, &ctx)?;
        serde_json::to_string_pretty(&serde_json::json!({
            "source": before,
            "result": after,
            "circuit": result.to_text(),
        }))?
    };
    match out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| BenchError::io(p, e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Register width recorded next to a checkpoint by `train`.
fn checkpoint_width(dir: &Path) -> Result<usize, BenchError> {
    let path = dir.join("meta.json");
    let text = std::fs::read_to_string(&path).map_err(|e| BenchError::io(&path, e))?;
    let meta: pipeline::RunMeta = serde_json::from_str(&text)?;
    Ok(meta.qubits)
}

fn run(cli: Cli) -> Result<(), BenchError> {
    let cfg = load_config(&cli.opts)?;
    let root = cfg.out_dir.clone();
    match cli.cmd {
        Cmd::Generate => {
            let n = pipeline::cmd_generate(&cfg, &root)?;
            eprintln!("wrote {n} circuits under {}", root.join("data").display());
        }
        Cmd::Train => {
            for m in pipeline::cmd_train(&cfg, &root)? {
                eprintln!(
                    "{} q{} g{} run{}: final val mse {}",
                    m.variant.name(),
                    m.qubits,
                    m.gates,
                    m.run,
                    m.final_val_mse.map_or("n/a".to_string(), |v| format!("{v:.4}"))
                );
            }
        }
        Cmd::Eval => {
            let rows = pipeline::cmd_eval(&cfg, &root)?;
            eprintln!("wrote {} result rows", rows.len());
        }
        Cmd::Baseline => {
            let rows = pipeline::cmd_baseline(&cfg, &root)?;
            eprintln!("wrote {} baseline rows", rows.len());
        }
        Cmd::Report => {
            for p in pipeline::cmd_report(&root)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Cmd::Optimize { file, checkpoints, out } => optimize(&cfg, &file, &checkpoints, out.as_ref())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
