//! Command-line entry point: train, evaluate, diagnose, and sweep over
//! dimensions and seeds, driven by a flat key=value config file with flag
//! overrides.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::checkpoint;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::{evaluate, per_relation_table, Metrics, Split};
use crate::model::{ModelConfig, ModelVariant};
use crate::train::{train, TrainConfig};

#[derive(Parser)]
#[command(name = "hkge", version, about = "Complex hyperbolic knowledge-graph embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model over the configured seeds and summarize test metrics.
    Train(RunArgs),
    /// Evaluate a checkpoint on a dataset split.
    Eval(EvalArgs),
    /// Print the per-relation hierarchy diagnostics of a dataset.
    Diagnose(DiagnoseArgs),
    /// Train and evaluate a grid of (model, dimension) cells.
    Sweep(SweepArgs),
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// Dataset directory containing train/valid/test files.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Model variant: RefH, RotH, AttH, FFTRefH, FFTRotH, FFTAttH.
    #[arg(long)]
    model: Option<String>,
    /// Embedding dimension (even; power of two for FFT variants).
    #[arg(long)]
    dim: Option<usize>,
    /// Optimizer: adam or adagrad.
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long = "batch-size")]
    batch_size: Option<usize>,
    #[arg(long = "neg-samples")]
    neg_samples: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Corrupt both query directions with independent negatives.
    #[arg(long = "double-neg", num_args = 0..=1, default_missing_value = "true")]
    double_neg: Option<bool>,
    #[arg(long = "max-epochs")]
    max_epochs: Option<usize>,
    /// Validations without improvement before stopping.
    #[arg(long)]
    patience: Option<usize>,
    /// Epochs between validation passes.
    #[arg(long = "valid-every")]
    valid_every: Option<usize>,
    /// Comma-separated run seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Output directory (created if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Entity embedding init standard deviation.
    #[arg(long = "init-scale")]
    init_scale: Option<f64>,
    /// Flat key=value config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint file to evaluate.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Dataset directory the checkpoint was trained on.
    #[arg(long)]
    data: PathBuf,
    /// Split to evaluate: valid or test.
    #[arg(long, default_value = "test")]
    split: String,
    /// Optional directory for metrics and per-relation tables.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    data: PathBuf,
    /// Optional output file (TSV); stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated model variants to sweep.
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
    /// Comma-separated embedding dimensions to sweep.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
}

/// Fully resolved run settings: defaults, then config file, then flags.
/// The variant is optional because `sweep` names its models separately.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data: PathBuf,
    pub variant: Option<ModelVariant>,
    pub dim: usize,
    pub init_scale: f64,
    pub train: TrainConfig,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
}

impl RunConfig {
    /// The effective settings as the flat key=value text that is echoed into
    /// the output directory.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut push = |k: &str, v: String| s.push_str(&format!("{k}={v}\n"));
        push("data", self.data.display().to_string());
        if let Some(variant) = self.variant {
            push("model", variant.name().to_string());
        }
        push("dim", self.dim.to_string());
        push("optimizer", self.train.optimizer.to_string());
        push("batch-size", self.train.batch_size.to_string());
        push("neg-samples", self.train.neg_samples.to_string());
        push("lr", self.train.learning_rate.to_string());
        push("double-neg", self.train.double_negative.to_string());
        push("max-epochs", self.train.max_epochs.to_string());
        push("patience", self.train.patience.to_string());
        push("valid-every", self.train.valid_every.to_string());
        push("init-scale", self.init_scale.to_string());
        push(
            "seeds",
            self.seeds
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        push("out", self.out.display().to_string());
        s
    }
}

/// Parses a flat key=value config file; `#` starts a comment line.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                message: "expected key=value".into(),
            });
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::Config(format!("config key '{key}': {e}")))
}

/// Merges the config file under the flags and fills defaults.
fn resolve(args: &RunArgs) -> Result<RunConfig> {
    let mut merged = args.clone();
    if let Some(path) = &args.config {
        let file = parse_config_file(path)?;
        for (key, value) in &file {
            match key.as_str() {
                "data" => {
                    merged.data.get_or_insert(PathBuf::from(value));
                }
                "out" => {
                    merged.out.get_or_insert(PathBuf::from(value));
                }
                "model" => {
                    merged.model.get_or_insert(value.clone());
                }
                "optimizer" => {
                    merged.optimizer.get_or_insert(value.clone());
                }
                "dim" => {
                    merged.dim.get_or_insert(parse_as(key, value)?);
                }
                "batch-size" => {
                    merged.batch_size.get_or_insert(parse_as(key, value)?);
                }
                "neg-samples" => {
                    merged.neg_samples.get_or_insert(parse_as(key, value)?);
                }
                "lr" => {
                    merged.lr.get_or_insert(parse_as(key, value)?);
                }
                "double-neg" => {
                    merged.double_neg.get_or_insert(parse_as(key, value)?);
                }
                "max-epochs" => {
                    merged.max_epochs.get_or_insert(parse_as(key, value)?);
                }
                "patience" => {
                    merged.patience.get_or_insert(parse_as(key, value)?);
                }
                "valid-every" => {
                    merged.valid_every.get_or_insert(parse_as(key, value)?);
                }
                "init-scale" => {
                    merged.init_scale.get_or_insert(parse_as(key, value)?);
                }
                "seeds" => {
                    if merged.seeds.is_none() {
                        let seeds: Vec<u64> = value
                            .split(',')
                            .map(|s| parse_as(key, s.trim()))
                            .collect::<Result<_>>()?;
                        merged.seeds = Some(seeds);
                    }
                }
                other => {
                    return Err(Error::Config(format!("unknown config key '{other}'")));
                }
            }
        }
    }

    let defaults = TrainConfig::default();
    let run = RunConfig {
        data: merged
            .data
            .ok_or_else(|| Error::Config("no dataset directory given (--data)".into()))?,
        variant: merged.model.map(|m| m.parse()).transpose()?,
        dim: merged.dim.unwrap_or(32),
        init_scale: merged.init_scale.unwrap_or(1e-3),
        train: TrainConfig {
            optimizer: merged
                .optimizer
                .map(|s| s.parse())
                .transpose()?
                .unwrap_or(defaults.optimizer),
            batch_size: merged.batch_size.unwrap_or(defaults.batch_size),
            neg_samples: merged.neg_samples.unwrap_or(defaults.neg_samples),
            learning_rate: merged.lr.unwrap_or(defaults.learning_rate),
            double_negative: merged.double_neg.unwrap_or(defaults.double_negative),
            max_epochs: merged.max_epochs.unwrap_or(defaults.max_epochs),
            patience: merged.patience.unwrap_or(defaults.patience),
            valid_every: merged.valid_every.unwrap_or(defaults.valid_every),
        },
        seeds: merged.seeds.unwrap_or_else(|| vec![1, 2, 3, 4, 5]),
        out: merged.out.unwrap_or_else(|| PathBuf::from("runs")),
    };
    run.train.validate()?;
    if run.seeds.is_empty() {
        return Err(Error::Config("seed list must be nonempty".into()));
    }
    Ok(run)
}

fn require_dataset_dir(dir: &Path) -> Result<()> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("dataset directory not found: {}", dir.display()),
        )))
    }
}

struct SeedResult {
    seed: u64,
    metrics: Metrics,
}

struct CellSummary {
    variant: ModelVariant,
    dim: usize,
    per_seed: Vec<SeedResult>,
    mean: [f64; 4],
    std: [f64; 4],
}

fn mean_and_std(values: &[[f64; 4]]) -> ([f64; 4], [f64; 4]) {
    let n = values.len() as f64;
    let mut mean = [0.0; 4];
    for v in values {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x / n;
        }
    }
    let mut std = [0.0; 4];
    if values.len() > 1 {
        for v in values {
            for ((s, x), m) in std.iter_mut().zip(v).zip(&mean) {
                *s += (x - m) * (x - m) / (n - 1.0);
            }
        }
        for s in std.iter_mut() {
            *s = s.sqrt();
        }
    }
    (mean, std)
}

/// Trains and test-evaluates one (variant, dim) cell across the run seeds.
fn run_cell(
    dataset: &Dataset,
    run: &RunConfig,
    variant: ModelVariant,
    dim: usize,
    cell_out: &Path,
) -> Result<CellSummary> {
    let mut per_seed = Vec::new();
    for &seed in &run.seeds {
        let model_config = ModelConfig {
            variant,
            dim,
            init_scale: run.init_scale,
            seed,
        };
        let seed_dir = cell_out.join(format!("seed{seed}"));
        let outcome = train(dataset, &model_config, &run.train, &seed_dir)?;
        let ckpt = checkpoint::load(&outcome.best_checkpoint)?;
        let eval_out = evaluate(&ckpt.params, dataset, Split::Test)?;
        let rows = per_relation_table(dataset, &eval_out.ranks)?;
        write_relation_table(&seed_dir.join("relations.tsv"), &rows)?;
        println!(
            "{variant}\tdim={dim}\tseed={seed}\tvalid_mrr={:.4}\ttest_mrr={:.4}",
            outcome.best_valid_mrr, eval_out.metrics.mrr
        );
        per_seed.push(SeedResult {
            seed,
            metrics: eval_out.metrics,
        });
    }
    let rows: Vec<[f64; 4]> = per_seed
        .iter()
        .map(|s| {
            [
                s.metrics.mrr,
                s.metrics.hits1,
                s.metrics.hits3,
                s.metrics.hits10,
            ]
        })
        .collect();
    let (mean, std) = mean_and_std(&rows);
    Ok(CellSummary {
        variant,
        dim,
        per_seed,
        mean,
        std,
    })
}

fn write_relation_table(path: &Path, rows: &[crate::eval::RelationRow]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "relation\tkhs\ttriples\thits@10")?;
    for r in rows {
        writeln!(
            f,
            "{}\t{:.2}\t{}\t{:.3}",
            r.relation, r.khs, r.test_count, r.hits10
        )?;
    }
    Ok(())
}

fn write_summary(path: &Path, cells: &[CellSummary]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "model\tdim\tseed\tMRR\tHits@1\tHits@3\tHits@10")?;
    for cell in cells {
        for s in &cell.per_seed {
            writeln!(
                f,
                "{}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
                cell.variant, cell.dim, s.seed, s.metrics.mrr, s.metrics.hits1, s.metrics.hits3,
                s.metrics.hits10
            )?;
        }
        writeln!(
            f,
            "{}\t{}\tmean\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            cell.variant, cell.dim, cell.mean[0], cell.mean[1], cell.mean[2], cell.mean[3]
        )?;
        writeln!(
            f,
            "{}\t{}\tstd\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            cell.variant, cell.dim, cell.std[0], cell.std[1], cell.std[2], cell.std[3]
        )?;
    }
    Ok(())
}

fn cmd_train(args: &RunArgs) -> Result<()> {
    let run = resolve(args)?;
    let variant = run
        .variant
        .ok_or_else(|| Error::Config("no model variant given (--model)".into()))?;
    require_dataset_dir(&run.data)?;
    // Reject a bad (variant, dimension) combination before any output exists.
    ModelConfig {
        variant,
        dim: run.dim,
        init_scale: run.init_scale,
        seed: 0,
    }
    .validate()?;
    fs::create_dir_all(&run.out)?;
    fs::write(run.out.join("config.txt"), run.echo())?;
    let dataset = Dataset::load(&run.data)?;
    let cell = run_cell(&dataset, &run, variant, run.dim, &run.out)?;
    write_summary(&run.out.join("summary.tsv"), std::slice::from_ref(&cell))?;
    println!(
        "{}\tdim={}\tmean over {} seeds: MRR={:.4} Hits@1={:.4} Hits@3={:.4} Hits@10={:.4}",
        cell.variant,
        cell.dim,
        cell.per_seed.len(),
        cell.mean[0],
        cell.mean[1],
        cell.mean[2],
        cell.mean[3]
    );
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    require_dataset_dir(&args.data)?;
    let split = match args.split.to_ascii_lowercase().as_str() {
        "valid" => Split::Valid,
        "test" => Split::Test,
        other => {
            return Err(Error::Config(format!(
                "unknown split '{other}' (expected valid or test)"
            )))
        }
    };
    let ckpt = checkpoint::load(&args.checkpoint)?;
    let dataset = Dataset::load(&args.data)?;
    if ckpt.entity_vocab_hash != dataset.entities.hash()
        || ckpt.relation_vocab_hash != dataset.relations.hash()
    {
        return Err(Error::Checkpoint(
            "checkpoint vocabularies do not match this dataset".into(),
        ));
    }
    let outcome = evaluate(&ckpt.params, &dataset, split)?;
    let m = &outcome.metrics;
    println!("model\tdim\tMRR\tHits@1\tHits@3\tHits@10");
    println!(
        "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
        ckpt.params.config.variant, ckpt.params.config.dim, m.mrr, m.hits1, m.hits3, m.hits10
    );
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        let mut f = fs::File::create(out.join("metrics.tsv"))?;
        writeln!(f, "model\tdim\tMRR\tHits@1\tHits@3\tHits@10")?;
        writeln!(
            f,
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            ckpt.params.config.variant, ckpt.params.config.dim, m.mrr, m.hits1, m.hits3, m.hits10
        )?;
        let rows = per_relation_table(&dataset, &outcome.ranks)?;
        write_relation_table(&out.join("relations.tsv"), &rows)?;
    }
    Ok(())
}

fn cmd_diagnose(args: &DiagnoseArgs) -> Result<()> {
    require_dataset_dir(&args.data)?;
    let dataset = Dataset::load(&args.data)?;
    let table = dataset.khs_table()?;
    let mut text = String::from("relation\tkhs\ttriples\n");
    for (name, khs, count) in &table {
        text.push_str(&format!("{name}\t{khs:.2}\t{count}\n"));
    }
    match &args.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let run = resolve(&args.run)?;
    require_dataset_dir(&run.data)?;
    if args.models.is_empty() || args.dims.is_empty() {
        return Err(Error::Config("sweep needs --models and --dims".into()));
    }
    let variants: Vec<ModelVariant> = args
        .models
        .iter()
        .map(|m| m.parse())
        .collect::<Result<_>>()?;
    let mut dims = Vec::new();
    for &d in &args.dims {
        if dims.contains(&d) {
            eprintln!("warning: duplicate dimension {d} ignored");
            continue;
        }
        dims.push(d);
    }
    for &variant in &variants {
        for &dim in &dims {
            ModelConfig {
                variant,
                dim,
                init_scale: run.init_scale,
                seed: 0,
            }
            .validate()?;
        }
    }

    fs::create_dir_all(&run.out)?;
    fs::write(run.out.join("config.txt"), run.echo())?;
    let dataset = Dataset::load(&run.data)?;

    let mut cells = Vec::new();
    for &variant in &variants {
        for &dim in &dims {
            let cell_out = run.out.join(format!("{}-d{}", variant.name(), dim));
            cells.push(run_cell(&dataset, &run, variant, dim, &cell_out)?);
        }
    }
    write_summary(&run.out.join("sweep.tsv"), &cells)?;

    // Pivot table in the shape of the dimension-sweep results: one row per
    // model, MRR and Hits@1 per dimension.
    let mut header = String::from("model");
    for d in &dims {
        header.push_str(&format!("\t{d}-MRR\t{d}-H@1"));
    }
    println!("{header}");
    for &variant in &variants {
        let mut row = variant.name().to_string();
        for &dim in &dims {
            let cell = cells
                .iter()
                .find(|c| c.variant == variant && c.dim == dim)
                .expect("cell computed");
            row.push_str(&format!("\t{:.3}\t{:.3}", cell.mean[0], cell.mean[1]));
        }
        println!("{row}");
    }
    Ok(())
}

/// Runs the CLI; returns the process exit status (0 on success, 2 when a
/// required path is missing, 1 otherwise).
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => 0,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::NotFound => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
