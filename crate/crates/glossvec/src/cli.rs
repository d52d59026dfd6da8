//! Command-line orchestration: corpus building, training, evaluation and
//! trace comparison.
//!
//! Exit codes: 0 on success, 2 for configuration problems (bad flags or
//! config keys, missing input paths), 3 for data problems (malformed files,
//! dimension mismatches, no coverage), 1 for I/O failures.

use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{
    build_vocabulary, encode_line, gloss_line, parse_gloss_line, tokenize, CorpusError,
    CorpusMode, Sentence,
};
use crate::embeddings::{load_text, save_text, EmbeddingError};
use crate::eval::{
    epochs_to_target, eval_analogy, eval_wordsim, pairset_stats, parse_analogies, parse_pairs,
    parse_wordsim, AnalogyOptions, AnalogyStatus, EpochTracker, EvalError, MetricTrace,
};
use crate::trainer::{
    init_pretrained, init_random, train, train_hogwild, Architecture, Model, TrainError,
    TrainingConfig,
};

/// Environment variable supplying the default output directory.
pub const OUT_DIR_ENV: &str = "GLOSSVEC_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or config file; exit code 2.
    Config(String),
    /// Bad input data; exit code 3.
    Data(String),
    /// Filesystem failure; exit code 1.
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }

    fn config(msg: impl Into<String>) -> CliError {
        CliError::Config(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Data(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io(io) => CliError::Io(io),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        match e {
            EmbeddingError::Io(io) => CliError::Io(io),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::InvalidConfig(m) => CliError::Config(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io(io) => CliError::Io(io),
            other => CliError::Data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "glossvec",
    version,
    about = "Train and evaluate word embeddings, with gloss-corpus pretraining"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a training corpus from a `headword<TAB>gloss` file
    BuildCorpus(BuildCorpusArgs),
    /// Train word vectors, optionally starting from pretrained vectors
    Train(Box<TrainArgs>),
    /// Evaluate saved vectors with one protocol
    Eval(EvalArgs),
    /// Report the first epoch at which trace A beats trace B's final value
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    /// Headword once, followed by the gloss
    Once,
    /// Headword re-inserted before every gloss token
    Multiple,
}

impl From<ModeArg> for CorpusMode {
    fn from(m: ModeArg) -> CorpusMode {
        match m {
            ModeArg::Once => CorpusMode::Once,
            ModeArg::Multiple => CorpusMode::Multiple,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ArchArg {
    Cbow,
    Skipgram,
}

impl From<ArchArg> for Architecture {
    fn from(a: ArchArg) -> Architecture {
        match a {
            ArchArg::Cbow => Architecture::Cbow,
            ArchArg::Skipgram => Architecture::Skipgram,
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildCorpusArgs {
    /// Gloss source file, one `headword<TAB>gloss text` entry per line
    #[arg(long)]
    pub gloss: PathBuf,
    /// Corpus construction mode
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Output corpus path
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Default)]
pub struct TrainArgs {
    /// Config file with `key = value` lines; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Plain-text corpus, one sentence per line (repeatable)
    #[arg(long)]
    pub corpus: Vec<PathBuf>,
    /// Gloss source to train on directly (built with --gloss-mode)
    #[arg(long)]
    pub gloss: Option<PathBuf>,
    /// How to expand the gloss source (default: once)
    #[arg(long, value_enum)]
    pub gloss_mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub arch: Option<ArchArg>,
    /// Vector dimension
    #[arg(long)]
    pub dim: Option<usize>,
    /// Maximum context window width
    #[arg(long)]
    pub window: Option<u32>,
    #[arg(long)]
    pub epochs: Option<u32>,
    #[arg(long)]
    pub lr_start: Option<f64>,
    /// Final learning rate (default: lr-start / 10000)
    #[arg(long)]
    pub lr_end: Option<f64>,
    /// Negative samples per target
    #[arg(long)]
    pub negatives: Option<u32>,
    /// Subsampling threshold; "off" or 0 disables (default: off)
    #[arg(long)]
    pub subsample: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Discard words seen fewer times than this
    #[arg(long)]
    pub min_count: Option<u32>,
    /// Vector file to initialize the word vectors from
    #[arg(long)]
    pub pretrained: Option<PathBuf>,
    /// Judgment file; traces the wordsim metric per epoch
    #[arg(long)]
    pub wordsim: Option<PathBuf>,
    /// Analogy file; traces analogy accuracy per epoch
    #[arg(long)]
    pub analogy: Option<PathBuf>,
    /// Pair file; traces pair-set mean and variance per epoch
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Output directory (default: $GLOSSVEC_OUT_DIR or ".")
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Vector file name inside the output directory
    #[arg(long)]
    pub vectors_out: Option<String>,
    /// Worker threads; more than one switches to lock-free parallel
    /// training, which is not reproducible
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Protocol {
    Wordsim,
    Analogy,
    Pairset,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Vector file in the text interchange format
    #[arg(long)]
    pub vectors: PathBuf,
    #[arg(long, value_enum)]
    pub protocol: Protocol,
    /// Dataset path for the chosen protocol
    #[arg(long)]
    pub dataset: PathBuf,
    /// Neighborhood size for the analogy protocol
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Keep the three analogy input words in the candidate list
    #[arg(long)]
    pub include_inputs: bool,
    /// Also write per-item records to this CSV
    #[arg(long)]
    pub report_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Trace CSV of the run under test (e.g. the pretrained run)
    #[arg(long)]
    pub trace_a: PathBuf,
    /// Trace CSV of the reference run; its final value is the target
    #[arg(long)]
    pub trace_b: PathBuf,
    /// Also print the traces side by side
    #[arg(long)]
    pub detail: bool,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::BuildCorpus(args) => run_build_corpus(&args),
        Command::Train(args) => run_train(&args),
        Command::Eval(args) => run_eval(&args),
        Command::Compare(args) => run_compare(&args),
    }
}

fn require_exists(path: &Path, what: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::config(format!(
            "{what} {} does not exist",
            path.display()
        )))
    }
}

fn run_build_corpus(args: &BuildCorpusArgs) -> Result<(), CliError> {
    require_exists(&args.gloss, "gloss file")?;
    let reader = BufReader::new(File::open(&args.gloss)?);
    let mut out = BufWriter::new(File::create(&args.out)?);
    let mode = CorpusMode::from(args.mode);
    let mut lines = 0u64;
    let mut tokens = 0u64;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = parse_gloss_line(&line, i + 1)?;
        let rendered = gloss_line(&entry, mode);
        tokens += rendered.split_whitespace().count() as u64;
        lines += 1;
        writeln!(out, "{rendered}")?;
    }
    out.flush()?;
    println!(
        "wrote {lines} lines ({tokens} tokens) to {}",
        args.out.display()
    );
    Ok(())
}

/// `key = value` config file; `#` starts a comment, repeated keys append.
struct FileConfig {
    values: HashMap<String, Vec<String>>,
}

const CONFIG_KEYS: &[&str] = &[
    "corpus",
    "gloss",
    "gloss-mode",
    "arch",
    "dim",
    "window",
    "epochs",
    "lr-start",
    "lr-end",
    "negatives",
    "subsample",
    "seed",
    "min-count",
    "pretrained",
    "wordsim",
    "analogy",
    "pairs",
    "out-dir",
    "vectors-out",
    "threads",
];

impl FileConfig {
    fn empty() -> FileConfig {
        FileConfig {
            values: HashMap::new(),
        }
    }

    fn load(path: &Path) -> Result<FileConfig, CliError> {
        let mut values: HashMap<String, Vec<String>> = HashMap::new();
        let reader = BufReader::new(File::open(path)?);
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!(
                    "{} line {}: expected `key = value`",
                    path.display(),
                    i + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !CONFIG_KEYS.contains(&key) {
                return Err(CliError::config(format!(
                    "{} line {}: unknown key {key:?}",
                    path.display(),
                    i + 1
                )));
            }
            if value.is_empty() {
                return Err(CliError::config(format!(
                    "{} line {}: empty value for {key:?}",
                    path.display(),
                    i + 1
                )));
            }
            values.entry(key.to_string()).or_default().push(value.to_string());
        }
        Ok(FileConfig { values })
    }

    fn one(&self, key: &str) -> Result<Option<&str>, CliError> {
        match self.values.get(key).map(Vec::as_slice) {
            None => Ok(None),
            Some([v]) => Ok(Some(v)),
            Some(_) => Err(CliError::config(format!("config key {key:?} set twice"))),
        }
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.one(key)? {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::config(format!("config key {key:?}: bad value {raw:?}"))
            }),
        }
    }

    fn many(&self, key: &str) -> Vec<String> {
        self.values.get(key).cloned().unwrap_or_default()
    }
}

/// A fully resolved training run: flags override config-file values, which
/// override defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub corpora: Vec<PathBuf>,
    pub gloss: Option<(PathBuf, CorpusMode)>,
    pub training: TrainingConfig,
    pub pretrained: Option<PathBuf>,
    pub wordsim: Option<PathBuf>,
    pub analogy: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub vectors_out: String,
    pub threads: usize,
}

fn parse_subsample(raw: &str) -> Result<Option<f64>, CliError> {
    if raw.eq_ignore_ascii_case("off") {
        return Ok(None);
    }
    let t: f64 = raw
        .parse()
        .map_err(|_| CliError::config(format!("bad subsample value {raw:?}")))?;
    if t == 0.0 {
        Ok(None)
    } else {
        Ok(Some(t))
    }
}

fn parse_mode(raw: &str) -> Result<CorpusMode, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "once" => Ok(CorpusMode::Once),
        "multiple" => Ok(CorpusMode::Multiple),
        other => Err(CliError::config(format!("bad gloss-mode {other:?}"))),
    }
}

fn parse_arch(raw: &str) -> Result<Architecture, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "cbow" => Ok(Architecture::Cbow),
        "skipgram" => Ok(Architecture::Skipgram),
        other => Err(CliError::config(format!("bad arch {other:?}"))),
    }
}

impl RunConfig {
    pub fn resolve(args: &TrainArgs) -> Result<RunConfig, CliError> {
        let file = match &args.config {
            Some(path) => {
                require_exists(path, "config file")?;
                FileConfig::load(path)?
            }
            None => FileConfig::empty(),
        };

        let mut corpora: Vec<PathBuf> = args.corpus.clone();
        if corpora.is_empty() {
            corpora = file.many("corpus").into_iter().map(PathBuf::from).collect();
        }

        let gloss_path: Option<PathBuf> = args
            .gloss
            .clone()
            .or_else(|| file.many("gloss").first().map(PathBuf::from));
        let gloss_mode = match args.gloss_mode {
            Some(m) => CorpusMode::from(m),
            None => match file.one("gloss-mode")? {
                Some(raw) => parse_mode(raw)?,
                None => CorpusMode::Once,
            },
        };
        let gloss = gloss_path.map(|p| (p, gloss_mode));

        if corpora.is_empty() && gloss.is_none() {
            return Err(CliError::config(
                "no training input: pass --corpus and/or --gloss",
            ));
        }

        let defaults = TrainingConfig::default();
        let architecture = match args.arch {
            Some(a) => Architecture::from(a),
            None => match file.one("arch")? {
                Some(raw) => parse_arch(raw)?,
                None => defaults.architecture,
            },
        };
        let lr_start = args
            .lr_start
            .or(file.parsed("lr-start")?)
            .unwrap_or(defaults.lr_start);
        let lr_end = args
            .lr_end
            .or(file.parsed("lr-end")?)
            .unwrap_or(lr_start * 1e-4);
        let subsample_t = match &args.subsample {
            Some(raw) => parse_subsample(raw)?,
            None => match file.one("subsample")? {
                Some(raw) => parse_subsample(raw)?,
                None => defaults.subsample_t,
            },
        };
        let training = TrainingConfig {
            architecture,
            dim: args.dim.or(file.parsed("dim")?).unwrap_or(defaults.dim),
            window: args
                .window
                .or(file.parsed("window")?)
                .unwrap_or(defaults.window),
            epochs: args
                .epochs
                .or(file.parsed("epochs")?)
                .unwrap_or(defaults.epochs),
            lr_start,
            lr_end,
            negatives: args
                .negatives
                .or(file.parsed("negatives")?)
                .unwrap_or(defaults.negatives),
            subsample_t,
            seed: args.seed.or(file.parsed("seed")?).unwrap_or(defaults.seed),
            min_count: args
                .min_count
                .or(file.parsed("min-count")?)
                .unwrap_or(defaults.min_count),
        };
        training.validate()?;

        let out_dir = args
            .out_dir
            .clone()
            .or_else(|| file.many("out-dir").first().map(PathBuf::from))
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let vectors_out = args
            .vectors_out
            .clone()
            .or_else(|| file.one("vectors-out").ok().flatten().map(String::from))
            .unwrap_or_else(|| "vectors.txt".to_string());

        let pathish = |flag: &Option<PathBuf>, key: &str| -> Option<PathBuf> {
            flag.clone()
                .or_else(|| file.many(key).first().map(PathBuf::from))
        };
        let config = RunConfig {
            corpora,
            gloss,
            training,
            pretrained: pathish(&args.pretrained, "pretrained"),
            wordsim: pathish(&args.wordsim, "wordsim"),
            analogy: pathish(&args.analogy, "analogy"),
            pairs: pathish(&args.pairs, "pairs"),
            out_dir,
            vectors_out,
            threads: args
                .threads
                .or(file.parsed("threads")?)
                .unwrap_or(1)
                .max(1),
        };

        for path in &config.corpora {
            require_exists(path, "corpus file")?;
        }
        if let Some((path, _)) = &config.gloss {
            require_exists(path, "gloss file")?;
        }
        for (path, what) in [
            (&config.pretrained, "pretrained vector file"),
            (&config.wordsim, "wordsim file"),
            (&config.analogy, "analogy file"),
            (&config.pairs, "pair file"),
        ] {
            if let Some(p) = path {
                require_exists(p, what)?;
            }
        }
        Ok(config)
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        out.push(line?);
    }
    Ok(out)
}

fn collect_training_lines(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let mut lines = Vec::new();
    for path in &config.corpora {
        lines.extend(read_lines(path)?);
    }
    if let Some((path, mode)) = &config.gloss {
        for (i, line) in read_lines(path)?.into_iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry = parse_gloss_line(&line, i + 1)?;
            lines.push(gloss_line(&entry, *mode));
        }
    }
    Ok(lines)
}

fn run_train(args: &TrainArgs) -> Result<(), CliError> {
    let config = RunConfig::resolve(args)?;
    let lines = collect_training_lines(&config)?;

    let vocab = build_vocabulary(
        lines.iter().flat_map(|l| tokenize(l)),
        config.training.min_count,
    )?;
    let sentences: Vec<Sentence> = lines
        .iter()
        .map(|l| encode_line(l, &vocab))
        .filter(|s| !s.is_empty())
        .collect();
    eprintln!(
        "vocabulary: {} words, {} training tokens",
        vocab.len(),
        vocab.total_count()
    );

    let mut model = match &config.pretrained {
        Some(path) => {
            let source = load_text(path)?;
            let (model, coverage) = init_pretrained(vocab, &source, &config.training)?;
            println!(
                "pretrained coverage: {}/{} words ({:.1}%)",
                coverage.covered,
                coverage.total,
                coverage.ratio() * 100.0
            );
            model
        }
        None => init_random(vocab, &config.training),
    };

    let mut tracker = EpochTracker::new();
    if let Some(path) = &config.wordsim {
        let judgments = parse_wordsim(&path.display().to_string(), open_buf(path)?)?;
        tracker = tracker.with_wordsim(judgments);
    }
    if let Some(path) = &config.analogy {
        let queries = parse_analogies(&path.display().to_string(), open_buf(path)?)?;
        tracker = tracker.with_analogy(queries, AnalogyOptions::default());
    }
    if let Some(path) = &config.pairs {
        let pairs = parse_pairs(&pairset_name(path), open_buf(path)?)?;
        tracker = tracker.with_pairset(pairs);
    }

    let epochs = config.training.epochs;
    let on_epoch = |epoch: u32, model: &Model, loss: f64| {
        tracker.observe(epoch, &model.to_embeddings());
        eprintln!("epoch {epoch}/{epochs}  mean loss {loss:.4}");
    };
    if config.threads > 1 {
        eprintln!(
            "parallel training with {} threads; results are not reproducible",
            config.threads
        );
        train_hogwild(
            &mut model,
            &sentences,
            &config.training,
            config.threads,
            on_epoch,
        )?;
    } else {
        train(&mut model, &sentences, &config.training, on_epoch)?;
    }

    fs::create_dir_all(&config.out_dir)?;
    let vectors_path = config.out_dir.join(&config.vectors_out);
    let set = model.to_embeddings();
    save_text(&set, &vectors_path)?;
    println!(
        "saved {} x {} vectors to {}",
        set.len(),
        set.dim(),
        vectors_path.display()
    );

    for trace in tracker.traces() {
        let path = config.out_dir.join(format!("trace_{}.csv", trace.name()));
        let mut w = BufWriter::new(File::create(&path)?);
        trace.write_csv(&mut w)?;
        w.flush()?;
        println!(
            "wrote trace {} ({} points)",
            path.display(),
            trace.points().len()
        );
    }
    Ok(())
}

fn open_buf(path: &Path) -> Result<BufReader<File>, CliError> {
    Ok(BufReader::new(File::open(path)?))
}

fn pairset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn run_eval(args: &EvalArgs) -> Result<(), CliError> {
    require_exists(&args.vectors, "vector file")?;
    require_exists(&args.dataset, "dataset file")?;
    let set = load_text(&args.vectors)?;
    let dataset_name = args.dataset.display().to_string();
    let mut report: Vec<String> = Vec::new();

    match args.protocol {
        Protocol::Wordsim => {
            let judgments = parse_wordsim(&dataset_name, open_buf(&args.dataset)?)?;
            let r = eval_wordsim(&set, &judgments)?;
            println!("spearman rho: {:.6}", r.rho);
            println!("covered: {} pairs, skipped: {}", r.covered, r.skipped);
            if args.report_csv.is_some() {
                report.push("word1,word2,human,cosine".to_string());
                for j in &judgments {
                    let sim = set
                        .vector_for(j.word1.as_str())
                        .zip(set.vector_for(j.word2.as_str()))
                        .and_then(|(u, v)| crate::embeddings::cosine(u, v).ok());
                    let cell = sim.map_or(String::new(), |s| s.to_string());
                    report.push(format!(
                        "{},{},{},{cell}",
                        j.word1, j.word2, j.human_score
                    ));
                }
            }
        }
        Protocol::Analogy => {
            let queries = parse_analogies(&dataset_name, open_buf(&args.dataset)?)?;
            let opts = AnalogyOptions {
                k: args.k,
                exclude_inputs: !args.include_inputs,
            };
            let r = eval_analogy(&set, &queries, opts)?;
            println!(
                "accuracy: {:.6} ({}/{})",
                r.accuracy,
                r.correct,
                r.correct + r.incorrect
            );
            println!("oov queries: {}", r.oov);
            if args.report_csv.is_some() {
                report.push("a,b,c,d,outcome".to_string());
                for rec in &r.records {
                    let outcome = match rec.status {
                        AnalogyStatus::Correct => "correct",
                        AnalogyStatus::Incorrect => "incorrect",
                        AnalogyStatus::Oov => "oov",
                    };
                    report.push(format!(
                        "{},{},{},{},{outcome}",
                        rec.query.a, rec.query.b, rec.query.c, rec.query.d
                    ));
                }
            }
        }
        Protocol::Pairset => {
            let pairs = parse_pairs(&pairset_name(&args.dataset), open_buf(&args.dataset)?)?;
            let r = pairset_stats(&set, &pairs)?;
            println!("mean similarity: {:.6}", r.mean);
            println!("variance: {:.6}", r.variance);
            println!("covered: {} pairs, skipped: {}", r.covered, r.skipped);
            if args.report_csv.is_some() {
                report.push("word1,word2,cosine".to_string());
                for (w1, w2) in &pairs.pairs {
                    let sim = set
                        .vector_for(w1.as_str())
                        .zip(set.vector_for(w2.as_str()))
                        .and_then(|(u, v)| crate::embeddings::cosine(u, v).ok());
                    let cell = sim.map_or(String::new(), |s| s.to_string());
                    report.push(format!("{w1},{w2},{cell}"));
                }
            }
        }
    }

    if let Some(path) = &args.report_csv {
        let mut w = BufWriter::new(File::create(path)?);
        for line in &report {
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        println!("wrote report {}", path.display());
    }
    Ok(())
}

fn run_compare(args: &CompareArgs) -> Result<(), CliError> {
    require_exists(&args.trace_a, "trace file")?;
    require_exists(&args.trace_b, "trace file")?;
    let a = MetricTrace::read_csv(args.trace_a.display().to_string(), open_buf(&args.trace_a)?)?;
    let b = MetricTrace::read_csv(args.trace_b.display().to_string(), open_buf(&args.trace_b)?)?;
    let (_, target) = b.last().ok_or_else(|| {
        CliError::Data(format!("{} has no points", args.trace_b.display()))
    })?;

    if args.detail {
        println!("epoch,a,b");
        let mut epochs: Vec<u32> = a
            .points()
            .iter()
            .chain(b.points())
            .map(|&(e, _)| e)
            .collect();
        epochs.sort_unstable();
        epochs.dedup();
        let lookup = |t: &MetricTrace, e: u32| {
            t.points()
                .iter()
                .find(|&&(pe, _)| pe == e)
                .map_or(String::new(), |&(_, v)| v.to_string())
        };
        for e in epochs {
            println!("{e},{},{}", lookup(&a, e), lookup(&b, e));
        }
    }

    println!("target_value,epochs_needed");
    match epochs_to_target(&a, target) {
        Some(epoch) => println!("{target},{epoch}"),
        None => println!("{target},never"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_config_parses_and_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        fs::write(&path, "dim = 32\n# comment\nepochs=3\ncorpus = a.txt\ncorpus = b.txt\n")
            .unwrap();
        let cfg = FileConfig::load(&path).unwrap();
        assert_eq!(cfg.parsed::<usize>("dim").unwrap(), Some(32));
        assert_eq!(cfg.parsed::<u32>("epochs").unwrap(), Some(3));
        assert_eq!(cfg.many("corpus"), vec!["a.txt", "b.txt"]);

        fs::write(&path, "dimension = 32\n").unwrap();
        assert!(matches!(
            FileConfig::load(&path),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn resolve_applies_precedence_and_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("c.txt");
        fs::write(&corpus, "a b c\n").unwrap();
        let conf = dir.path().join("run.conf");
        fs::write(
            &conf,
            format!(
                "corpus = {}\ndim = 64\nlr-start = 0.05\nseed = 9\n",
                corpus.display()
            ),
        )
        .unwrap();

        let args = TrainArgs {
            config: Some(conf),
            dim: Some(32), // flag beats file
            ..TrainArgs::default()
        };
        let rc = RunConfig::resolve(&args).unwrap();
        assert_eq!(rc.training.dim, 32);
        assert_eq!(rc.training.seed, 9);
        assert_eq!(rc.training.lr_start, 0.05);
        // lr_end follows the resolved lr_start
        assert!((rc.training.lr_end - 0.05 * 1e-4).abs() < 1e-15);
        assert_eq!(rc.training.window, 8);
        assert_eq!(rc.threads, 1);
        assert_eq!(rc.vectors_out, "vectors.txt");
    }

    #[test]
    fn resolve_requires_some_input() {
        let args = TrainArgs::default();
        assert!(matches!(
            RunConfig::resolve(&args),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn resolve_rejects_missing_paths() {
        let args = TrainArgs {
            corpus: vec![PathBuf::from("/definitely/not/here.txt")],
            ..TrainArgs::default()
        };
        let err = RunConfig::resolve(&args).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn subsample_values() {
        assert_eq!(parse_subsample("off").unwrap(), None);
        assert_eq!(parse_subsample("0").unwrap(), None);
        assert_eq!(parse_subsample("1e-3").unwrap(), Some(1e-3));
        assert!(parse_subsample("banana").is_err());
    }

    #[test]
    fn error_exit_codes_are_distinct() {
        assert_eq!(CliError::config("x").exit_code(), 2);
        assert_eq!(CliError::Data("x".into()).exit_code(), 3);
        assert_eq!(
            CliError::Io(std::io::Error::other("x")).exit_code(),
            1
        );
        // library error classification
        assert_eq!(
            CliError::from(TrainError::InvalidConfig("bad".into())).exit_code(),
            2
        );
        assert_eq!(
            CliError::from(TrainError::DimensionMismatch {
                expected: 2,
                found: 3
            })
            .exit_code(),
            3
        );
        assert_eq!(CliError::from(EvalError::NoCoverage).exit_code(), 3);
    }
}
