//! The `eventloc` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 bad input data, 3 runtime failure.
//! With `--json` every result and every error is a single JSON document on
//! stdout; progress lines always go to stderr.

mod config;

use std::ffi::OsString;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

pub use config::{merge_config, parse_config, ConfigEntry};

use crate::baseline::NearestPlaceBaseline;
use crate::corpus::{
    generate_synthetic, holdout_split, load_corpus, read_sentence_json, save_corpus, scan_corpus, synthetic_embeddings,
    Corpus, CorpusError, SplitFractions, SynthConfig, Template,
};
use crate::eval::{
    evaluate_model, run_ablation, standard_conditions, AblationConfig, AllZero, Condition, EvalError, Evaluation,
    GoldReplay, InstanceError, Predictor, Report,
};
use crate::features::{EmbeddingTable, FeatureConfig, FeatureError, FeatureGroup, TagInventory};
use crate::models::{
    checkpoint_features, save_checkpoint, train, AnyLinker, Architecture, LinkerModel, ModelError, TrainConfig,
    TrainHistory,
};
use crate::nn::Real;

#[derive(Debug, Parser)]
#[command(name = "eventloc", version, about = "Link event verbs to the tokens naming where they happened")]
pub struct Cli {
    /// Emit results and errors as JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for evaluation.
    #[arg(long, global = true, env = "EVENTLOC_THREADS")]
    pub threads: Option<usize>,
    /// `key = value` file of flag defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a JSONL corpus and list every violation.
    Validate { corpus: PathBuf },
    /// Write a synthetic corpus and, optionally, matching embeddings.
    Synth(SynthArgs),
    /// Train a labeler and write its checkpoint and history.
    Train(TrainArgs),
    /// Score checkpoints or built-in systems on a corpus.
    Evaluate(EvaluateArgs),
    /// Label one sentence.
    Predict(PredictArgs),
    /// Score the nearest-place rule system.
    Baseline(BaselineArgs),
    /// Retrain under feature ablations across several partitions.
    Ablate(AblateArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a word-vector file covering the corpus vocabulary.
    #[arg(long)]
    pub embeddings_out: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub embedding_dim: usize,
    /// Fraction of place-name words that get a vector.
    #[arg(long, default_value_t = 0.9)]
    pub place_coverage: f64,
    /// Restrict generation to one sentence template.
    #[arg(long)]
    pub template: Option<Template>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DTypeArg {
    F32,
    F64,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    /// Word-vector text file; the dimension is read from the file.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Feature groups to leave out, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "GROUPS")]
    pub disable: Vec<String>,
    #[arg(long)]
    pub distance_clip: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "bilstm")]
    pub arch: Architecture,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_checkpoint: PathBuf,
    /// Training history JSON; defaults to the checkpoint path plus `.history.json`.
    #[arg(long)]
    pub history_out: Option<PathBuf>,
    /// Separate validation corpus.
    #[arg(long, conflicts_with = "val_fraction")]
    pub val_corpus: Option<PathBuf>,
    /// Fraction of `--corpus` held out for validation.
    #[arg(long)]
    pub val_fraction: Option<f64>,
    #[arg(long, value_enum, default_value = "f32")]
    pub dtype: DTypeArg,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Model checkpoint; repeat to compare several.
    #[arg(long, action = clap::ArgAction::Append)]
    pub checkpoint: Vec<PathBuf>,
    /// Built-in system: baseline, gold or all-zero; repeatable.
    #[arg(long, action = clap::ArgAction::Append)]
    pub system: Vec<String>,
    /// Word vectors for checkpoints that use embeddings.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Also list up to this many misclassified instances per system.
    #[arg(long, default_value_t = 0)]
    pub errors: usize,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// A sentence object, inline or as a file path.
    #[arg(long)]
    pub sentence_json: String,
    /// Event verb position; defaults to every annotated event.
    #[arg(long)]
    pub verb_index: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub errors: usize,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Condition names, comma separated; the first is the reference.
    #[arg(long, value_delimiter = ',')]
    pub conditions: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub partitions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "bilstm")]
    pub arch: Architecture,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub distance_clip: Option<usize>,
    /// Directory of finished cells; rerunning resumes from it.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Also write the report JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Usage,
    Data,
    Runtime,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Runtime => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(m: impl fmt::Display) -> Self {
        CliError {
            kind: ErrorKind::Usage,
            message: m.to_string(),
        }
    }

    pub fn data(m: impl fmt::Display) -> Self {
        CliError {
            kind: ErrorKind::Data,
            message: m.to_string(),
        }
    }

    pub fn runtime(m: impl fmt::Display) -> Self {
        CliError {
            kind: ErrorKind::Runtime,
            message: m.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "error": {
                "kind": self.kind,
                "code": self.kind.exit_code(),
                "message": self.message,
            }
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::data(e)
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        CliError::data(e)
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Config(_) => CliError::usage(e),
            ModelError::Diverged { .. } | ModelError::Io(_) => CliError::runtime(e),
            _ => CliError::data(e),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::TooFewPartitions(_) | EvalError::NoConditions => CliError::usage(e),
            EvalError::Io(_) => CliError::runtime(e),
            _ => CliError::data(e),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Result of one subcommand: human-readable text and its JSON form.
struct Output {
    text: String,
    json: Value,
    /// Exit code when the command ran but its verdict is negative.
    code: i32,
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json_requested = args.iter().take_while(|a| *a != "--").any(|a| a == "--json");
    let report = |e: &CliError, json: bool| {
        if json {
            emit(&format!("{}\n", e.to_json()));
        } else {
            eprintln!("error: {e}");
        }
        e.kind.exit_code()
    };
    let args = match with_config(args) {
        Ok(a) => a,
        Err(e) => return report(&e, json_requested),
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                emit(&e.to_string());
                return 0;
            }
            if json_requested {
                return report(&CliError::usage(e.to_string().trim_end()), true);
            }
            eprint!("{e}");
            return 1;
        }
    };
    init_logging(cli.verbose);
    if let Some(n) = cli.threads {
        if n == 0 {
            return report(&CliError::usage("--threads must be at least 1"), cli.json);
        }
        // Fails only if a pool already exists in this process, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli.command, cli.json) {
        Ok(out) => {
            if cli.json {
                emit(&format!("{}\n", serde_json::to_string_pretty(&out.json).expect("output serializes")));
            } else {
                emit(&out.text);
            }
            out.code
        }
        Err(e) => report(&e, cli.json),
    }
}

// A closed stdout (e.g. piped into `head`) is not worth a panic.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn with_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(path) = config::config_path(&args) else {
        return Ok(args);
    };
    let entries = config::read_config(Path::new(&path)).map_err(CliError::usage)?;
    merge_config(&Cli::command(), args, &entries).map_err(|e| CliError::usage(format!("{}: {e}", Path::new(&path).display())))
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn dispatch(cmd: &Command, json: bool) -> CliResult<Output> {
    match cmd {
        Command::Validate { corpus } => cmd_validate(corpus),
        Command::Synth(a) => cmd_synth(a),
        Command::Train(a) => cmd_train(a, json),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Baseline(a) => cmd_evaluate(&EvaluateArgs {
            corpus: a.corpus.clone(),
            checkpoint: Vec::new(),
            system: vec!["baseline".into()],
            embeddings: None,
            threshold: None,
            errors: a.errors,
        }),
        Command::Ablate(a) => cmd_ablate(a, json),
    }
}

fn read_corpus(path: &Path) -> CliResult<Corpus> {
    load_corpus(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

fn cmd_validate(path: &Path) -> CliResult<Output> {
    let file = File::open(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let (n, problems) = scan_corpus(BufReader::new(file)).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let listed: Vec<Value> = problems
        .iter()
        .map(|p| match p {
            CorpusError::Parse { line, message } => json!({"line": line, "sentence": null, "message": message}),
            CorpusError::Invalid { sentence, line, violations } => json!({
                "line": line,
                "sentence": sentence,
                "message": p.to_string(),
                "violations": violations.iter().map(ToString::to_string).collect::<Vec<_>>(),
            }),
            other => json!({"line": null, "sentence": null, "message": other.to_string()}),
        })
        .collect();
    let mut text = String::new();
    for p in &problems {
        text.push_str(&format!("{}: {p}\n", path.display()));
    }
    let valid = problems.is_empty();
    if valid {
        text.push_str(&format!("{}: {n} sentences, all valid\n", path.display()));
    } else {
        text.push_str(&format!("{}: {} of {n} sentences invalid\n", path.display(), problems.len()));
    }
    Ok(Output {
        text,
        json: json!({
            "command": "validate",
            "corpus": path.display().to_string(),
            "sentences": n,
            "valid": valid,
            "problems": listed,
        }),
        code: if valid { 0 } else { ErrorKind::Data.exit_code() },
    })
}

fn cmd_synth(a: &SynthArgs) -> CliResult<Output> {
    if a.n == 0 {
        return Err(CliError::usage("--n must be at least 1"));
    }
    if a.embedding_dim == 0 {
        return Err(CliError::usage("--embedding-dim must be at least 1"));
    }
    if !(0.0..=1.0).contains(&a.place_coverage) {
        return Err(CliError::usage("--place-coverage must lie in [0, 1]"));
    }
    let mut cfg = SynthConfig::with_sentences(a.n);
    if let Some(t) = a.template {
        cfg = cfg.only(t);
    }
    let corpus = generate_synthetic(&cfg, a.seed)?;
    save_corpus(&corpus, &a.out).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", a.out.display())))?;
    let mut text = format!(
        "wrote {} sentences ({} events) to {}\n",
        corpus.len(),
        corpus.instance_count(),
        a.out.display()
    );
    if let Some(path) = &a.embeddings_out {
        let table = synthetic_embeddings(&corpus, &cfg.lexicon, a.embedding_dim, a.seed, a.place_coverage);
        table
            .save(path)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        text.push_str(&format!(
            "wrote {} {}-dimensional vectors to {}\n",
            table.len(),
            a.embedding_dim,
            path.display()
        ));
    }
    Ok(Output {
        text,
        json: json!({
            "command": "synth",
            "out": a.out.display().to_string(),
            "sentences": corpus.len(),
            "instances": corpus.instance_count(),
            "seed": a.seed,
            "embeddings": a.embeddings_out.as_ref().map(|p| p.display().to_string()),
            "embedding_dim": a.embedding_dim,
        }),
        code: 0,
    })
}

fn parse_group(name: &str) -> CliResult<FeatureGroup> {
    let norm = name.trim().replace('-', "_");
    let norm = match norm.as_str() {
        "embeddings" => "embedding",
        other => other,
    };
    FeatureGroup::ORDER
        .into_iter()
        .find(|g| g.name() == norm)
        .ok_or_else(|| {
            let names: Vec<&str> = FeatureGroup::ORDER.iter().map(FeatureGroup::name).collect();
            CliError::usage(format!("unknown feature group {name:?} (expected one of {})", names.join(", ")))
        })
}

fn load_embeddings(path: &Path) -> CliResult<EmbeddingTable> {
    let ctx = |e: FeatureError| CliError::data(format!("{}: {e}", path.display()));
    let dim = EmbeddingTable::infer_dim(path).map_err(ctx)?;
    EmbeddingTable::load(path, dim).map_err(ctx)
}

fn feature_config(a: &FeatureArgs) -> CliResult<(FeatureConfig, Arc<EmbeddingTable>)> {
    let mut f = FeatureConfig::default();
    for name in &a.disable {
        if name.trim().replace('-', "_") == "distances" || name.trim() == "distance" {
            f.linear_distance = false;
            f.tree_distance = false;
            continue;
        }
        f.set(parse_group(name)?, false);
    }
    if let Some(c) = a.distance_clip {
        f.distance_clip = c;
    }
    let table = match (&a.embeddings, f.embedding) {
        (Some(path), _) => load_embeddings(path)?,
        (None, true) => {
            return Err(CliError::usage(
                "--embeddings is required unless the embedding group is disabled (--disable embedding)",
            ))
        }
        (None, false) => EmbeddingTable::empty(1),
    };
    f.embedding_dim = table.dim();
    f.validate().map_err(CliError::usage)?;
    Ok((f, Arc::new(table)))
}

fn train_config(
    seed: u64,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    lr: Option<f64>,
    patience: Option<usize>,
) -> CliResult<TrainConfig> {
    let mut t = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    if let Some(e) = epochs {
        t.epochs = e;
        if patience.is_none() && t.patience >= e {
            t.patience = e.saturating_sub(1);
        }
    }
    if let Some(b) = batch_size {
        t.batch_size = b;
    }
    if let Some(lr) = lr {
        t.lr = lr;
    }
    if let Some(p) = patience {
        t.patience = p;
    }
    t.validate().map_err(CliError::usage)?;
    Ok(t)
}

fn check_threshold(t: Option<f64>) -> CliResult<()> {
    match t {
        Some(t) if !(t > 0.0 && t < 1.0) => Err(CliError::usage(format!("--threshold must lie in (0, 1), got {t}"))),
        _ => Ok(()),
    }
}

fn cmd_train(a: &TrainArgs, json: bool) -> CliResult<Output> {
    check_threshold(a.threshold)?;
    let (features, embeddings) = feature_config(&a.features)?;
    let tc = train_config(a.seed, a.epochs, a.batch_size, a.lr, a.patience)?;
    let corpus = read_corpus(&a.corpus)?;
    let (tr, va) = match (&a.val_corpus, a.val_fraction) {
        (Some(path), _) => (corpus, read_corpus(path)?),
        (None, f) => holdout_split(&corpus, f.unwrap_or(0.1), a.seed)?,
    };
    let inventory = TagInventory::build(&tr);
    let history_path = a
        .history_out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.history.json", a.out_checkpoint.display())));
    let run = Run {
        arch: a.arch,
        features,
        inventory,
        embeddings,
        cfg: tc,
        threshold: a.threshold,
        checkpoint: &a.out_checkpoint,
        quiet: json,
    };
    let (history, params) = match a.dtype {
        DTypeArg::F32 => run.go::<f32>(&tr, &va)?,
        DTypeArg::F64 => run.go::<f64>(&tr, &va)?,
    };
    let history_json = serde_json::to_string_pretty(&history).expect("history serializes");
    write_file(&history_path, history_json.as_bytes())?;
    let dtype = match a.dtype {
        DTypeArg::F32 => "f32",
        DTypeArg::F64 => "f64",
    };
    let text = format!(
        "trained {} ({dtype}, {params} parameters) on {} instances; best epoch {} with validation F1 {:.4}{}\nwrote {} and {}\n",
        a.arch,
        tr.instance_count(),
        history.best_epoch,
        history.best_val_f1,
        if history.stopped_early { ", stopped early" } else { "" },
        a.out_checkpoint.display(),
        history_path.display()
    );
    Ok(Output {
        text,
        json: json!({
            "command": "train",
            "architecture": a.arch.name(),
            "dtype": dtype,
            "parameters": params,
            "seed": a.seed,
            "train_instances": tr.instance_count(),
            "val_instances": va.instance_count(),
            "checkpoint": a.out_checkpoint.display().to_string(),
            "history_path": history_path.display().to_string(),
            "history": history,
        }),
        code: 0,
    })
}

struct Run<'a> {
    arch: Architecture,
    features: FeatureConfig,
    inventory: TagInventory,
    embeddings: Arc<EmbeddingTable>,
    cfg: TrainConfig,
    threshold: Option<f64>,
    checkpoint: &'a Path,
    quiet: bool,
}

impl Run<'_> {
    fn go<T: Real>(&self, tr: &Corpus, va: &Corpus) -> CliResult<(TrainHistory, usize)> {
        let mut model = LinkerModel::<T>::new(
            self.arch.default_config(),
            self.features,
            self.inventory.clone(),
            Arc::clone(&self.embeddings),
            self.cfg.seed,
        )?;
        let quiet = self.quiet;
        let history = train(&mut model, tr, va, &self.cfg, |r| {
            if !quiet {
                eprintln!("{r}");
            }
        })?;
        if let Some(t) = self.threshold {
            model.threshold = t;
        }
        save_checkpoint(&model, self.checkpoint).map_err(|e| match e {
            ModelError::Io(io) => CliError::runtime(format!("cannot write {}: {io}", self.checkpoint.display())),
            other => other.into(),
        })?;
        Ok((history, model.num_parameters()))
    }
}

/// Loads a checkpoint, supplying the embedding table its features need.
pub fn open_checkpoint(path: &Path, embeddings: Option<&Path>) -> Result<AnyLinker, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    let ctx = |e: ModelError| CliError::data(format!("{}: {e}", path.display()));
    let features = checkpoint_features(&bytes).map_err(ctx)?;
    let table = if features.embedding {
        let Some(ep) = embeddings else {
            return Err(CliError::usage(format!(
                "{} uses word embeddings; pass --embeddings",
                path.display()
            )));
        };
        let table = load_embeddings(ep)?;
        if table.dim() != features.embedding_dim {
            return Err(CliError::data(format!(
                "{} has {}-dimensional vectors, {} was trained with {}",
                ep.display(),
                table.dim(),
                path.display(),
                features.embedding_dim
            )));
        }
        table
    } else {
        EmbeddingTable::empty(features.embedding_dim.max(1))
    };
    AnyLinker::from_bytes(&bytes, Arc::new(table)).map_err(ctx)
}

fn builtin(name: &str) -> CliResult<Box<dyn Predictor>> {
    match name {
        "baseline" | "nearest" => Ok(Box::new(NearestPlaceBaseline)),
        "gold" => Ok(Box::new(GoldReplay)),
        "all-zero" | "zero" => Ok(Box::new(AllZero)),
        other => Err(CliError::usage(format!(
            "unknown system {other:?} (expected baseline, gold or all-zero)"
        ))),
    }
}

fn cmd_evaluate(a: &EvaluateArgs) -> CliResult<Output> {
    if a.checkpoint.is_empty() && a.system.is_empty() {
        return Err(CliError::usage("give at least one --checkpoint or --system"));
    }
    check_threshold(a.threshold)?;
    let mut systems: Vec<(Box<dyn Predictor>, Option<String>)> = Vec::new();
    for name in &a.system {
        systems.push((builtin(name)?, None));
    }
    for path in &a.checkpoint {
        let mut model = open_checkpoint(path, a.embeddings.as_deref())?;
        if let Some(t) = a.threshold {
            model.set_threshold(t);
        }
        let label = format!(
            "{} ({})",
            model.architecture(),
            path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
        );
        systems.push((Box::new(model), Some(label)));
    }
    let corpus = read_corpus(&a.corpus)?;
    if corpus.instance_count() == 0 {
        return Err(CliError::data(format!("{} has no event instances", a.corpus.display())));
    }
    let evals: Vec<Evaluation> = systems
        .iter()
        .map(|(p, label)| {
            let mut e = evaluate_model(p.as_ref(), &corpus);
            if let Some(l) = label {
                e.system = l.clone();
            }
            e
        })
        .collect();
    let report = Report::from_evaluations(&evals);
    let mut text = report.table();
    let mut errors = serde_json::Map::new();
    for e in &evals {
        if e.failures > 0 {
            text.push_str(&format!("{}: {} instances failed and were scored as all zeros\n", e.system, e.failures));
        }
        if a.errors > 0 {
            let shown: Vec<&InstanceError> = e.errors.iter().take(a.errors).collect();
            for err in &shown {
                text.push_str(&format!(
                    "{} sentence {} verb {} ({}): gold {:?} predicted {:?}{}\n",
                    e.system,
                    err.sentence_id.clone().unwrap_or_else(|| err.sentence_index.to_string()),
                    err.verb_index,
                    err.verb,
                    err.gold,
                    err.predicted,
                    err.failure.as_ref().map(|f| format!(" [{f}]")).unwrap_or_default()
                ));
            }
            errors.insert(e.system.clone(), serde_json::to_value(shown).expect("errors serialize"));
        }
    }
    let mut doc = json!({
        "command": "evaluate",
        "corpus": a.corpus.display().to_string(),
        "instances": corpus.instance_count(),
        "report": report,
        "failures": evals.iter().map(|e| (e.system.clone(), Value::from(e.failures))).collect::<serde_json::Map<_, _>>(),
    });
    if a.errors > 0 {
        doc["errors"] = Value::Object(errors);
    }
    Ok(Output {
        text,
        json: doc,
        code: 0,
    })
}

fn cmd_predict(a: &PredictArgs) -> CliResult<Output> {
    check_threshold(a.threshold)?;
    let raw = a.sentence_json.trim();
    let text_in = if raw.starts_with('{') {
        raw.to_string()
    } else {
        let content =
            fs::read_to_string(raw).map_err(|e| CliError::data(format!("--sentence-json {raw}: {e}")))?;
        content
            .lines()
            .find(|l| !l.trim().is_empty())
            .map(str::to_string)
            .ok_or_else(|| CliError::data(format!("{raw} is empty")))?
    };
    let sentence = read_sentence_json(&text_in)?;
    let verbs: Vec<usize> = match a.verb_index {
        Some(v) => vec![v],
        None if !sentence.events.is_empty() => sentence.events.iter().map(|e| e.verb_index).collect(),
        None => return Err(CliError::usage("the sentence has no events; pass --verb-index")),
    };
    if let Some(&v) = verbs.iter().find(|&&v| v >= sentence.len()) {
        return Err(CliError::usage(format!(
            "--verb-index {v} out of range for a sentence of {} tokens",
            sentence.len()
        )));
    }
    let mut model = open_checkpoint(&a.checkpoint, a.embeddings.as_deref())?;
    if let Some(t) = a.threshold {
        model.set_threshold(t);
    }
    let mut text = String::new();
    let mut preds = Vec::new();
    for v in verbs {
        let p = model.predict(&sentence, v)?;
        let locs: Vec<usize> = p.labels.positives().collect();
        let words: Vec<&str> = locs.iter().map(|&i| sentence.tokens[i].text.as_str()).collect();
        text.push_str(&format!("verb {v} ({}): locations {:?} {:?}\n", sentence.tokens[v].text, locs, words));
        for (i, (tok, pr)) in sentence.tokens.iter().zip(&p.probabilities).enumerate() {
            text.push_str(&format!("  {i:>3} {:<20} {pr:.4} {}\n", tok.text, p.labels.as_slice()[i]));
        }
        preds.push(json!({
            "verb_index": v,
            "verb": sentence.tokens[v].text,
            "probabilities": p.probabilities,
            "labels": p.labels.as_slice(),
            "locations": locs,
            "location_tokens": words,
        }));
    }
    Ok(Output {
        text,
        json: json!({
            "command": "predict",
            "checkpoint": a.checkpoint.display().to_string(),
            "threshold": model.threshold(),
            "predictions": preds,
        }),
        code: 0,
    })
}

fn cmd_ablate(a: &AblateArgs, json: bool) -> CliResult<Output> {
    let base = FeatureConfig {
        distance_clip: a.distance_clip.unwrap_or(FeatureConfig::default().distance_clip),
        ..FeatureConfig::default()
    };
    let conditions: Vec<Condition> = if a.conditions.is_empty() {
        standard_conditions(base)
    } else {
        a.conditions
            .iter()
            .map(|n| {
                Condition::by_name(n.trim(), base).ok_or_else(|| {
                    let names: Vec<String> = standard_conditions(base).into_iter().map(|c| c.name).collect();
                    CliError::usage(format!("unknown condition {n:?} (expected one of {})", names.join(", ")))
                })
            })
            .collect::<CliResult<_>>()?
    };
    let needs_embeddings = conditions.iter().any(|c| c.features.embedding);
    let table = match &a.embeddings {
        Some(p) => load_embeddings(p)?,
        None if needs_embeddings => return Err(CliError::usage("these conditions use embeddings; pass --embeddings")),
        None => EmbeddingTable::empty(1),
    };
    let train_cfg = train_config(a.seed, a.epochs, a.batch_size, a.lr, a.patience)?;
    let corpus = read_corpus(&a.corpus)?;
    let cfg = AblationConfig {
        n_partitions: a.partitions,
        base_seed: a.seed,
        fractions: SplitFractions::default(),
        arch: a.arch.default_config(),
        train: train_cfg,
        cache_dir: a.cache_dir.clone(),
    };
    let report = run_ablation(&corpus, &conditions, Arc::new(table), &cfg, |cell| {
        if !json {
            match cell.f1() {
                Some(f1) => eprintln!("{} partition {}: F1 {f1:.4}", cell.condition, cell.partition),
                None => eprintln!(
                    "{} partition {}: failed ({})",
                    cell.condition,
                    cell.partition,
                    cell.error.as_deref().unwrap_or("unknown")
                ),
            }
        }
    })?;
    if let Some(path) = &a.out {
        write_file(path, report.to_json().as_bytes())?;
    }
    Ok(Output {
        text: report.table(),
        json: json!({
            "command": "ablate",
            "report": report,
        }),
        code: 0,
    })
}
