//! The `oacp` command line.
//!
//! Exit codes: 0 success, 1 usage error (including out-of-range values), 2
//! data or parse error, 3 numerical failure (training divergence, gradient
//! check above threshold).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dimreduce::{
    class_signatures, kmeans_partition_with_restarts, reduce_sequence, Aggregation, ReductionPartition,
    DEFAULT_MAX_ITERS, DEFAULT_RESTARTS,
};
use crate::error::{Error, Result};
use crate::harness::{
    gen_synthetic, load_features, run_comparison, save_features, save_features_binary, DatasetManifest, MethodConfig,
    SyntheticSpec, TaskKind,
};
use crate::model::{
    evaluate, export_text, grad_check, load_model, save_model, sgd_train, Checkpoint, ModelConfig, PoolingKind,
    TrainConfig,
};
use crate::pooling::PyramidConfig;
use crate::seq::{FeatureSequence, LabeledSequence, Preprocessing};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "oacp",
    version,
    about = "Order-aware convolutional pooling for sequence classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic order-only dataset with train and test manifests.
    Synth(SynthArgs),
    /// Train a classifier on a manifest and write a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a manifest.
    Eval(EvalArgs),
    /// Train and evaluate several pooling methods; CSV to stdout.
    Compare(CompareArgs),
    /// Check backpropagated gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// Learn or apply a class-signature dimensionality reduction.
    Reduce(ReduceArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value = "trend-pair")]
    task: TaskKind,
    #[arg(long = "t", default_value_t = 40)]
    len: usize,
    #[arg(long = "k", default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 200)]
    n_train: usize,
    #[arg(long, default_value_t = 100)]
    n_test: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Write binary feature files instead of text.
    #[arg(long)]
    binary: bool,
}

#[derive(Debug, Args, Clone)]
struct ShapeArgs {
    #[arg(long, default_value_t = 8)]
    interval: usize,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long, default_value_t = 3)]
    filters: usize,
    #[arg(long, default_value = "1,2")]
    pyramid: PyramidConfig,
}

#[derive(Debug, Args, Clone)]
struct FitArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    momentum: f64,
    #[arg(long, default_value_t = 0.0)]
    weight_decay: f64,
    /// Keep the manifest order in every epoch.
    #[arg(long)]
    no_shuffle: bool,
    /// Keep one frame out of every N.
    #[arg(long, default_value_t = 5)]
    sample_rate: usize,
    /// L2-normalize each feature block per frame before concatenation.
    #[arg(long)]
    l2_normalize: bool,
}

impl FitArgs {
    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            epochs: self.epochs,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
            seed: self.seed,
            shuffle_each_epoch: !self.no_shuffle,
        }
    }

    fn preprocessing(&self) -> Preprocessing {
        Preprocessing {
            sample_rate: self.sample_rate,
            l2_normalize: self.l2_normalize,
        }
    }

    fn method(&self, pooling: PoolingKind) -> MethodConfig {
        MethodConfig {
            interval: self.shape.interval,
            stride: self.shape.stride,
            filters: self.shape.filters,
            pyramid: self.shape.pyramid.clone(),
            ..MethodConfig::new(pooling)
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "oacp")]
    pooling: PoolingKind,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long)]
    model_out: PathBuf,
    /// Also write the plain-text parameter dump.
    #[arg(long)]
    export_text: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    confusion: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    train_manifest: PathBuf,
    #[arg(long)]
    test_manifest: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "average,max,pyramid,oacp")]
    methods: Vec<PoolingKind>,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Debug, Args)]
struct GradcheckArgs {
    #[arg(long = "k", default_value_t = 3)]
    dim: usize,
    #[arg(long = "t", default_value_t = 6)]
    len: usize,
    #[arg(long, default_value_t = 2)]
    interval: usize,
    #[arg(long, default_value_t = 2)]
    filters: usize,
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long, default_value = "oacp")]
    pooling: PoolingKind,
    #[arg(long, default_value = "1,2")]
    pyramid: PyramidConfig,
    /// Maximum accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, required_unless_present = "apply")]
    target_dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, conflicts_with = "apply")]
    partition_out: Option<PathBuf>,
    #[arg(long, requires = "out_dir")]
    apply: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value = "sum")]
    aggregation: Aggregation,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// k-means restarts; the lowest objective wins.
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    /// Scale signatures to unit norm before clustering.
    #[arg(long)]
    normalize_signatures: bool,
}

/// Entry point used by the binary.
pub fn main() -> ExitCode {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Compare(a) => compare(a),
        Command::Gradcheck(a) => gradcheck(a),
        Command::Reduce(a) => reduce(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Argument values rejected by validation count as usage errors.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invalid { .. } => EXIT_USAGE,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_DATA,
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn synth(a: SynthArgs) -> Result<ExitCode> {
    let spec = SyntheticSpec {
        task: a.task,
        n_train: a.n_train,
        n_test: a.n_test,
        len: a.len,
        dim: a.dim,
        noise_sigma: a.noise,
        seed: a.seed,
    };
    let data = gen_synthetic(&spec)?;
    for (split, items) in [("train", &data.train), ("test", &data.test)] {
        let dir = a.out.join(split);
        create_dir(&dir)?;
        let mut manifest = DatasetManifest::new(data.class_names.clone(), split, &a.out);
        for (i, item) in items.iter().enumerate() {
            let name = format!("{split}/seq_{i:05}.{}", if a.binary { "bin" } else { "txt" });
            if a.binary {
                save_features_binary(&item.sequence, a.out.join(&name))?;
            } else {
                save_features(&item.sequence, a.out.join(&name))?;
            }
            manifest.push(name, item.label);
        }
        manifest.save(a.out.join(format!("{split}.manifest")))?;
    }
    println!(
        "wrote {} train and {} test sequences ({}, T={}, K={}) to {}",
        data.train.len(),
        data.test.len(),
        a.task,
        a.len,
        a.dim,
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

/// Loads a manifest under `pre`, without padding, and returns the data with
/// its declared class count.
fn load_manifest(path: &Path, pre: &Preprocessing) -> Result<(Vec<LabeledSequence>, usize)> {
    let manifest = DatasetManifest::load(path)?;
    if manifest.entries.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            msg: "manifest lists no sequences".into(),
        });
    }
    let data = manifest.load_sequences(pre, 1)?;
    Ok((data, manifest.classes()))
}

fn pad_all(data: Vec<LabeledSequence>, min_len: usize) -> Vec<LabeledSequence> {
    data.into_iter()
        .map(|d| LabeledSequence::new(d.sequence.pad_to(min_len), d.label))
        .collect()
}

fn train(a: TrainArgs) -> Result<ExitCode> {
    let pre = a.fit.preprocessing();
    let (data, classes) = load_manifest(&a.manifest, &pre)?;
    let dim = data[0].sequence.dim();
    let model = a.fit.method(a.pooling).model_config(dim, classes).build(a.fit.seed)?;
    let data = pad_all(data, model.min_sequence_len());
    let (model, history) = sgd_train(model, &data, &a.fit.train_config())?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "epoch,loss,mean_loss,train_accuracy");
    for h in &history {
        let _ = writeln!(out, "{},{:.6},{:.6},{:.4}", h.epoch, h.loss, h.mean_loss, h.accuracy);
    }
    let ckpt = Checkpoint {
        model,
        preprocessing: pre,
    };
    save_model(&a.model_out, &ckpt)?;
    if let Some(path) = &a.export_text {
        fs::write(path, export_text(&ckpt)).map_err(|e| Error::io(path, e))?;
    }
    eprintln!(
        "saved {} model ({} parameters) to {}",
        ckpt.model.pooling(),
        ckpt.model.parameter_count(),
        a.model_out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn eval(a: EvalArgs) -> Result<ExitCode> {
    let ckpt = load_model(&a.model)?;
    let (data, classes) = load_manifest(&a.manifest, &ckpt.preprocessing)?;
    if classes != ckpt.model.classes() {
        return Err(Error::Format {
            path: a.manifest.clone(),
            msg: format!(
                "manifest declares {classes} classes, model has {}",
                ckpt.model.classes()
            ),
        });
    }
    let data = pad_all(data, ckpt.model.min_sequence_len());
    let ev = evaluate(&ckpt.model, &data)?;
    println!("accuracy={:.4} correct={} total={}", ev.accuracy, ev.correct, ev.total);
    if a.confusion {
        for row in &ev.confusion {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            println!("{}", cells.join(" "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn compare(a: CompareArgs) -> Result<ExitCode> {
    let pre = a.fit.preprocessing();
    let (train, _) = load_manifest(&a.train_manifest, &pre)?;
    let (test, _) = load_manifest(&a.test_manifest, &pre)?;
    let methods: Vec<MethodConfig> = a.methods.iter().map(|&k| a.fit.method(k)).collect();
    let table = run_comparison(&train, &test, &methods, &a.fit.train_config())?;
    print!("{}", table.to_csv());
    for row in &table.rows {
        eprintln!("{}: {:.3}s", row.method.name, row.wall_time.as_secs_f64());
    }
    Ok(ExitCode::SUCCESS)
}

fn gradcheck(a: GradcheckArgs) -> Result<ExitCode> {
    let cfg = ModelConfig {
        pooling: a.pooling,
        input_dim: a.dim,
        classes: a.classes,
        interval: a.interval,
        stride: 1,
        filters: a.filters,
        pyramid: a.pyramid,
    };
    let model = cfg.build(a.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x5eed);
    let data = (0..a.len * a.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let seq = FeatureSequence::from_flat(a.len, a.dim, data)?;
    let label = rng.random_range(0..a.classes);
    let report = grad_check(&model, &LabeledSequence::new(seq, label), a.eps, a.seed)?;
    println!(
        "max_relative_error={:e} parameters={} worst_parameter={}",
        report.max_relative_error, report.parameters, report.worst_parameter
    );
    if report.max_relative_error < a.threshold {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "gradient check failed: {:e} >= {:e}",
            report.max_relative_error, a.threshold
        );
        Ok(ExitCode::from(EXIT_NUMERICAL))
    }
}

fn reduce(a: ReduceArgs) -> Result<ExitCode> {
    let manifest = DatasetManifest::load(&a.manifest)?;
    if let Some(partition_path) = &a.apply {
        let out_dir = a.out_dir.as_ref().expect("clap enforces --out-dir");
        let partition = ReductionPartition::load(partition_path)?;
        create_dir(out_dir)?;
        let mut reduced = DatasetManifest::new(manifest.class_names.clone(), manifest.split_tag.clone(), out_dir);
        for (i, entry) in manifest.entries.iter().enumerate() {
            if entry.paths.len() != 1 {
                return Err(Error::Format {
                    path: a.manifest.clone(),
                    msg: format!(
                        "entry {i} lists {} blocks; reduce one block at a time",
                        entry.paths.len()
                    ),
                });
            }
            let seq = load_features(manifest.resolve(&entry.paths[0]))?;
            let name = format!("seq_{i:05}.txt");
            save_features(&reduce_sequence(&seq, &partition)?, out_dir.join(&name))?;
            reduced.push(name, entry.label);
        }
        let tag = if manifest.split_tag.is_empty() {
            "reduced"
        } else {
            &manifest.split_tag
        };
        let out_manifest = out_dir.join(format!("{tag}.manifest"));
        reduced.save(&out_manifest)?;
        println!(
            "reduced {} sequences from D={} to k={}; manifest {}",
            manifest.entries.len(),
            partition.dim(),
            partition.groups(),
            out_manifest.display()
        );
        return Ok(ExitCode::SUCCESS);
    }

    let target = a.target_dim.expect("clap enforces --target-dim");
    let data = manifest.load_raw()?;
    let frames: Vec<(&[f64], usize)> = data
        .iter()
        .flat_map(|d| d.sequence.frames().map(move |f| (f, d.label)))
        .collect();
    let mut sig = class_signatures(&frames, manifest.classes())?;
    if a.normalize_signatures {
        sig = sig.normalized();
    }
    let partition =
        kmeans_partition_with_restarts(&sig, target, a.seed, a.max_iters, a.restarts)?.with_aggregation(a.aggregation);
    match &a.partition_out {
        Some(path) => partition.save(path)?,
        None => print!("{}", partition.to_text()),
    }
    eprintln!("partitioned D={} into k={} groups", partition.dim(), partition.groups());
    Ok(ExitCode::SUCCESS)
}
