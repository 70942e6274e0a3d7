//! `sift-carve` command-line interface.

use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sift_core::cv::CvOptions;
use sift_core::rng::derive_seed;
use sift_core::{
    cross_validate, fit_doc_freq, vectorize_all, ClassWeight, Forest, FragmentSet, FragmentSize, StatsPolicy,
};

use crate::config::{ConfigFile, RunConfig};
use crate::corpus::{scan_dataset, LabelRule};
use crate::fragmenter::{extract_fragments, read_dump, write_dump};
use crate::model::{load_model, save_model};
use crate::report::{self, ExtractSummary};

/// Exit status when a class in the label set has no fragments to evaluate.
pub const EXIT_EMPTY_CLASS: u8 = 3;

const TRAIN_SALT: u64 = 0x0074_7261_696e;

#[derive(Debug, Parser)]
#[command(name = "sift-carve", version, about = "File fragment type classification with byte TF-IDF and random forests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the files of a dataset that survive preprocessing, as JSON.
    Scan(ScanArgs),
    /// Extract fragments into a binary dump and print per-class counts.
    Extract(ExtractArgs),
    /// Train a model on every fragment of a dataset or dump.
    Train(TrainArgs),
    /// Run k-fold cross-validation and write JSON and CSV reports.
    Evaluate(EvaluateArgs),
    /// Label every fragment-sized block of an input.
    Classify(ClassifyArgs),
    /// Show the bytes with the highest mean weight for one class.
    InspectWeights(InspectArgs),
    /// Write a synthetic five-class corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Flat TOML file with run settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset root directory.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Fragment size in bytes: 32, 64, 128, 256, 512, 1024, 2048 or 4096.
    #[arg(long, value_parser = parse_fragment_size)]
    pub fragment_size: Option<u32>,
    #[arg(long, value_enum)]
    pub label_rule: Option<LabelRule>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct ForestArgs {
    /// Number of trees.
    #[arg(long)]
    pub trees: Option<u32>,
    /// Features examined per split.
    #[arg(long)]
    pub mtry: Option<u32>,
    #[arg(long)]
    pub min_leaf: Option<u32>,
    #[arg(long)]
    pub max_depth: Option<u32>,
    /// `none` or `balanced`.
    #[arg(long, value_parser = parse_class_weight)]
    pub class_weight: Option<ClassWeight>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Write the manifest here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Fragment dump path; a JSON summary is written next to it.
    #[arg(long)]
    pub output: PathBuf,
    /// Also write the TF-IDF feature matrix (stats fitted on all fragments).
    #[arg(long)]
    pub features_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Read fragments from a dump instead of a dataset.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[command(flatten)]
    pub forest: ForestArgs,
    /// Number of folds.
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub k: Option<u32>,
    /// `per-fold` or `global`.
    #[arg(long, value_parser = parse_stats_policy)]
    pub stats_policy: Option<StatsPolicy>,
    /// Shorthand for `--stats-policy global`.
    #[arg(long, conflicts_with = "stats_policy")]
    pub global_stats: bool,
    /// Keep all fragments of a file in the same fold.
    #[arg(long)]
    pub group_by_file: bool,
    /// Spread each class evenly over the folds.
    #[arg(long)]
    pub stratified: bool,
    /// JSON report path; `<stem>.metrics.csv` and `<stem>.confusion.csv` go
    /// next to it.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Input file, or `-` for stdin.
    #[arg(long)]
    pub input: PathBuf,
    /// Ignore a trailing block shorter than the fragment size.
    #[arg(long)]
    pub skip_tail: bool,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "class")]
    pub class: String,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub files_per_class: usize,
}

fn parse_fragment_size(s: &str) -> Result<u32, String> {
    let n: u32 = s.parse().map_err(|e| format!("{e}"))?;
    FragmentSize::new(n).map(FragmentSize::get).map_err(|e| e.to_string())
}

fn parse_class_weight(s: &str) -> Result<ClassWeight, String> {
    match s {
        "none" => Ok(ClassWeight::None),
        "balanced" => Ok(ClassWeight::Balanced),
        _ => Err("expected `none` or `balanced`".into()),
    }
}

fn parse_stats_policy(s: &str) -> Result<StatsPolicy, String> {
    match s {
        "per-fold" => Ok(StatsPolicy::PerFold),
        "global" => Ok(StatsPolicy::Global),
        _ => Err("expected `per-fold` or `global`".into()),
    }
}

impl DataArgs {
    fn layer(&self) -> Result<ConfigFile> {
        let base = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(base.overlay(ConfigFile {
            dataset: self.dataset.clone(),
            fragment_size: self.fragment_size,
            label_rule: self.label_rule,
            seed: self.seed,
            ..ConfigFile::default()
        }))
    }
}

impl ForestArgs {
    fn layer(&self) -> ConfigFile {
        ConfigFile {
            trees: self.trees,
            mtry: self.mtry,
            min_leaf: self.min_leaf,
            max_depth: self.max_depth,
            class_weight: self.class_weight,
            ..ConfigFile::default()
        }
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Scan(args) => scan(args),
        Command::Extract(args) => extract(args),
        Command::Train(args) => train(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Classify(args) => classify(args),
        Command::InspectWeights(args) => inspect_weights(args),
        Command::Synth(args) => {
            crate::synthetic::write_corpus(&args.output, args.files_per_class, args.seed)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value.as_deref().ok_or_else(|| anyhow!("missing --{flag} (or `{flag}` in the config file)"))
}

fn scan(args: ScanArgs) -> Result<ExitCode> {
    let cfg = RunConfig::resolve(args.data.layer()?, false)?;
    let root = require(&cfg.dataset, "dataset")?;
    let manifest = scan_dataset(root, cfg.fragment_size, cfg.label_rule)
        .with_context(|| format!("scanning {}", root.display()))?;
    let json = manifest.to_json() + "\n";
    match args.output {
        Some(path) => fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(json.as_bytes())?,
    }
    for reject in &manifest.rejects {
        eprintln!("rejected {}: {}", reject.path.display(), reject.reason);
    }
    Ok(ExitCode::SUCCESS)
}

/// Fragments from `--dump` when given, otherwise scanned and extracted from
/// the dataset.
fn load_fragments(cfg: &RunConfig) -> Result<FragmentSet> {
    if let Some(dump) = &cfg.dump {
        let set = read_dump(dump).with_context(|| format!("reading {}", dump.display()))?;
        if set.is_empty() {
            bail!("{} holds no fragments", dump.display());
        }
        return Ok(set);
    }
    let root = require(&cfg.dataset, "dataset")?;
    let manifest = scan_dataset(root, cfg.fragment_size, cfg.label_rule)
        .with_context(|| format!("scanning {}", root.display()))?;
    for reject in &manifest.rejects {
        eprintln!("rejected {}: {}", reject.path.display(), reject.reason);
    }
    if manifest.entries.is_empty() {
        bail!(
            "no usable files under {} (need at least {} bytes each)",
            root.display(),
            2 * cfg.fragment_size.get()
        );
    }
    Ok(extract_fragments(&manifest, cfg.seed)?)
}

fn extract(args: ExtractArgs) -> Result<ExitCode> {
    let cfg = RunConfig::resolve(args.data.layer()?, true)?;
    let set = load_fragments(&cfg)?;
    write_dump(&args.output, &set).with_context(|| format!("writing {}", args.output.display()))?;

    let summary = ExtractSummary::new(&set, cfg.seed);
    let summary_path = args.output.with_extension("json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("writing {}", summary_path.display()))?;
    print!("{}", summary.table());

    if let Some(path) = &args.features_csv {
        let bytes: Vec<&[u8]> = set.fragments.iter().map(|f| f.bytes.as_slice()).collect();
        let stats = fit_doc_freq(&bytes)?;
        let rows = vectorize_all(&bytes, &stats);
        fs::write(path, report::features_csv(&rows, &set))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Fits document frequencies on every fragment and trains on all of them.
pub fn train_on_set(set: &FragmentSet, cfg: &RunConfig) -> Result<Forest> {
    let bytes: Vec<&[u8]> = set.fragments.iter().map(|f| f.bytes.as_slice()).collect();
    let stats = fit_doc_freq(&bytes)?;
    let x = vectorize_all(&bytes, &stats);
    Ok(Forest::train(
        &x,
        &set.label_indices(),
        set.labels.clone(),
        stats,
        set.fragment_size,
        cfg.hyper,
        derive_seed(cfg.seed, TRAIN_SALT),
    )?)
}

fn train(args: TrainArgs) -> Result<ExitCode> {
    let layer = args.data.layer()?.overlay(args.forest.layer()).overlay(ConfigFile {
        dump: args.dump.clone(),
        model: args.model.clone(),
        ..ConfigFile::default()
    });
    let cfg = RunConfig::resolve(layer, true)?;
    let model_path = require(&cfg.model, "model")?.to_path_buf();
    let set = load_fragments(&cfg)?;
    let forest = train_on_set(&set, &cfg)?;
    save_model(&forest, &model_path).with_context(|| format!("writing {}", model_path.display()))?;
    println!(
        "trained {} trees on {} fragments ({} classes) -> {}",
        forest.trees.len(),
        set.len(),
        forest.labels.len(),
        model_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let stats_policy = if args.global_stats {
        Some(StatsPolicy::Global)
    } else {
        args.stats_policy
    };
    let layer = args.data.layer()?.overlay(args.forest.layer()).overlay(ConfigFile {
        dump: args.dump.clone(),
        report: args.report.clone(),
        k: args.k,
        stats_policy,
        group_by_file: args.group_by_file.then_some(true),
        stratified: args.stratified.then_some(true),
        ..ConfigFile::default()
    });
    let cfg = RunConfig::resolve(layer, true)?;
    let report_path = require(&cfg.report, "report")?.to_path_buf();
    let set = load_fragments(&cfg)?;

    let opts = CvOptions {
        k: cfg.k,
        hyper: cfg.hyper,
        stats_policy: cfg.stats_policy,
        seed: cfg.seed,
        group_by_file: cfg.group_by_file,
        stratified: cfg.stratified,
    };
    let result = cross_validate(&set, &opts)?;

    fs::write(&report_path, report::to_json(&result))
        .with_context(|| format!("writing {}", report_path.display()))?;
    fs::write(sibling(&report_path, "metrics.csv"), report::metrics_csv(&result))?;
    fs::write(sibling(&report_path, "confusion.csv"), report::confusion_csv(&result))?;

    print!("{}", report::metrics_table(&result));
    for warning in &result.warnings {
        eprintln!("warning: {warning}");
    }
    if result.has_empty_class() {
        eprintln!("error: at least one class has no fragments to evaluate");
        return Ok(ExitCode::from(EXIT_EMPTY_CLASS));
    }
    Ok(ExitCode::SUCCESS)
}

fn classify(args: ClassifyArgs) -> Result<ExitCode> {
    let forest = load_model(&args.model).with_context(|| format!("loading {}", args.model.display()))?;
    let data = if args.input.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        buf
    } else {
        fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?
    };

    let r = forest.fragment_size.bytes();
    let tail = data.len() % r;
    if tail != 0 && !args.skip_tail {
        bail!(
            "input length {} is not a multiple of the model's {r}-byte fragment size (pass --skip-tail to ignore the last {tail} bytes)",
            data.len()
        );
    }

    let idf = forest.doc_freq.idf_table();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for (i, block) in data.chunks_exact(r).enumerate() {
        let p = forest.classify_with(block, &idf)?;
        let label = forest.labels.get(p.label).expect("prediction within label set");
        writeln!(out, "{}\t{}\t{:.4}", i * r, label, p.top_fraction())?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// Printable form of a byte value.
pub fn byte_symbol(b: u8) -> String {
    const CONTROL: [&str; 33] = [
        "NUL", "SOH", "STX", "ETX", "EOT", "ENQ", "ACK", "BEL", "BS", "HT", "LF", "VT", "FF", "CR", "SO", "SI",
        "DLE", "DC1", "DC2", "DC3", "DC4", "NAK", "SYN", "ETB", "CAN", "EM", "SUB", "ESC", "FS", "GS", "RS", "US",
        "SP",
    ];
    match b {
        0..=0x20 => CONTROL[usize::from(b)].to_string(),
        0x7F => "DEL".to_string(),
        0x21..=0x7E => char::from(b).to_string(),
        _ => "-".to_string(),
    }
}

/// `(byte, mean weight)` pairs for one class, highest first.
pub fn top_weights(forest: &Forest, class: &str, top: usize) -> Result<Vec<(u8, f64)>> {
    let idx = forest.labels.index_of_str(class).ok_or_else(|| {
        let valid: Vec<&str> = forest.labels.iter().map(|l| l.as_str()).collect();
        anyhow!("unknown class {class:?}; valid classes: {}", valid.join(", "))
    })?;
    let means = forest.class_mean_weights[usize::from(idx)].as_array();
    let mut ranked: Vec<(u8, f64)> = (0..=255u8).map(|b| (b, means[usize::from(b)])).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top);
    Ok(ranked)
}

fn inspect_weights(args: InspectArgs) -> Result<ExitCode> {
    let forest = load_model(&args.model).with_context(|| format!("loading {}", args.model.display()))?;
    let rows = top_weights(&forest, &args.class, args.top)?;
    println!("{:<6} {:<6} {:>12}", "byte", "symbol", "mean_weight");
    for (b, w) in rows {
        println!("0x{b:02X}   {:<6} {w:>12.6}", byte_symbol(b));
    }
    Ok(ExitCode::SUCCESS)
}
