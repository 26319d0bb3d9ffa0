//! Command-line front end. Every subcommand writes its artifacts plus a
//! `manifest.json` into `--out-dir`.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a data error.

mod manifest;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::confidence::{self, ScoredItem};
use crate::error::{Error, Result};
use crate::features::{build_vocabulary, CountMode, FeatureConfig, Vocabulary};
use crate::harness::{self, Curve, CurveConfig, CurveSchedule, StopParams, Strategy, Trained};
use crate::ingest::{self, resources, AnalyzedTweet, NormalizationConfig, RecordFormat};
use crate::rng;
use crate::service::{self, Session, SessionConfig};
use crate::svm::{self, LinearModel, TrainConfig};
use crate::synth::{self, SynthConfig};

pub use manifest::RunManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "unrest-filter",
    version,
    about = "Relevance filtering for short social-media texts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Normalize records and apply the keyword, script and duplicate filters.
    Preprocess(PreprocessArgs),
    /// Build a feature vocabulary.
    Vocab(VocabArgs),
    /// Train a classifier on a labeled corpus.
    Train(TrainCmd),
    /// k-fold cross-validated precision, recall and F1.
    Eval(EvalArgs),
    /// Learning curves for random and uncertainty-sampled training sets.
    Curve(CurveArgs),
    /// Metrics over items whose |score| clears each threshold.
    Sweep(SweepArgs),
    /// Logistic regression of correctness on |score|, with Wald tests.
    Regress(RegressArgs),
    /// Run the annotation service.
    Serve(ServeArgs),
    /// Generate a synthetic labeled corpus.
    Synth(SynthArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Preprocess(_) => "preprocess",
            Command::Vocab(_) => "vocab",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Curve(_) => "curve",
            Command::Sweep(_) => "sweep",
            Command::Regress(_) => "regress",
            Command::Serve(_) => "serve",
            Command::Synth(_) => "synth",
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Directory for artifacts and the run manifest.
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Seed for all randomness in the run.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct Jobs {
    /// Worker threads (default: all cores). Never changes the output.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct NormArgs {
    /// Emoji table, `codepoints TAB index` per line (default: bundled).
    #[arg(long)]
    pub emoji_table: Option<PathBuf>,
    /// Stopword list, one per line.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// POS collapse map, `fine TAB collapsed` per line (default: bundled).
    #[arg(long)]
    pub pos_map: Option<PathBuf>,
    /// Tokens that exclude a tweet, one per line.
    #[arg(long)]
    pub blocked: Option<PathBuf>,
}

impl NormArgs {
    fn load(&self) -> Result<NormalizationConfig> {
        let mut cfg = NormalizationConfig::default();
        if let Some(p) = &self.emoji_table {
            cfg.emoji_table = resources::load_emoji_table(p)?;
        }
        if let Some(p) = &self.stopwords {
            cfg.stopwords = resources::load_word_list(p)?;
        }
        if let Some(p) = &self.pos_map {
            cfg.pos_collapse_map = resources::load_pos_map(p)?;
        }
        if let Some(p) = &self.blocked {
            cfg.blocked_keywords = resources::load_word_list(p)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn files(&self) -> Vec<(&'static str, &Path)> {
        [
            ("emoji-table", &self.emoji_table),
            ("stopwords", &self.stopwords),
            ("pos-map", &self.pos_map),
            ("blocked", &self.blocked),
        ]
        .into_iter()
        .filter_map(|(k, p)| p.as_deref().map(|p| (k, p)))
        .collect()
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountModeArg {
    Occurrences,
    DocumentFrequency,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FeatureArgs {
    /// Feature set: pos1, pos1-2, pos1-3, lex1, lex1-2 or lex1-2_pos1-3.
    #[arg(long, default_value = "lex1", value_parser = parse_features)]
    #[serde(serialize_with = "ser_display")]
    pub features: FeatureName,
    /// Minimum ngram count for the vocabulary.
    #[arg(long, default_value_t = 3)]
    pub min_count: usize,
    /// What the minimum count counts.
    #[arg(long, value_enum, default_value_t = CountModeArg::Occurrences)]
    pub count_mode: CountModeArg,
}

#[derive(Debug, Clone)]
pub struct FeatureName(String);

impl std::fmt::Display for FeatureName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn parse_features(s: &str) -> std::result::Result<FeatureName, String> {
    FeatureConfig::preset(s).map_err(|e| e.to_string())?;
    Ok(FeatureName(s.to_ascii_lowercase()))
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl FeatureArgs {
    fn config(&self) -> FeatureConfig {
        let mut cfg = FeatureConfig::preset(&self.features.0)
            .expect("validated by the parser")
            .with_min_count(self.min_count);
        cfg.count_mode = match self.count_mode {
            CountModeArg::Occurrences => CountMode::Occurrences,
            CountModeArg::DocumentFrequency => CountMode::DocumentFrequency,
        };
        cfg
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SvmArgs {
    /// Regularization trade-off (default: 1 / mean squared feature-vector norm).
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Stop when the maximum KKT violation falls below this.
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_epochs: usize,
}

impl SvmArgs {
    fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            c: self.c,
            tolerance: self.tolerance,
            max_epochs: self.max_epochs,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// One JSON record per line.
    Jsonl,
    /// One raw text per line.
    Text,
}

#[derive(Args, Debug, Serialize)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Jsonl)]
    pub format: InputFormat,
    /// Keep only tweets containing one of these tokens (one per line).
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    #[command(flatten)]
    pub norm: NormArgs,
    /// Skip the script filter.
    #[arg(long)]
    pub all_scripts: bool,
    /// Draw a time-stratified sample of this many tweets.
    #[arg(long)]
    pub sample: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct VocabArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainCmd {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(skip)]
    pub jobs: Jobs,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Random,
    Active,
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct CurveArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = StrategyArg::Both)]
    pub strategy: StrategyArg,
    /// Points per curve.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// First training-set size (default: pool size / points, rounded up).
    #[arg(long)]
    pub start_size: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Run only this fold (0-based).
    #[arg(long)]
    pub fold: Option<usize>,
    #[arg(long, default_value_t = 0.99)]
    pub stop_threshold: f64,
    #[arg(long, default_value_t = 3)]
    pub stop_window: usize,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(skip)]
    pub jobs: Jobs,
}

#[derive(Args, Debug, Serialize)]
pub struct ScoreSource {
    /// Score with this model instead of cross-validation (needs --vocab).
    #[arg(long, requires = "vocab")]
    pub model: Option<PathBuf>,
    #[arg(long, requires = "model")]
    pub vocab: Option<PathBuf>,
    /// Folds for out-of-fold scores when no model is given.
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `default` or comma-separated ascending thresholds.
    #[arg(long, default_value = "default", value_parser = parse_grid)]
    pub grid: Grid,
    #[command(flatten)]
    pub scores: ScoreSource,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(skip)]
    pub jobs: Jobs,
}

#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    confidence::parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

#[derive(Args, Debug, Serialize)]
pub struct RegressArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub scores: ScoreSource,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(skip)]
    pub jobs: Jobs,
}

#[derive(Args, Debug, Serialize)]
pub struct ServeArgs {
    /// Pool records; read only when `--out-dir` holds no session yet.
    #[arg(long)]
    pub input: PathBuf,
    /// Labeled records for held-out metrics in the status report.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: String,
    /// A `curve.tsv` or `sweep.tsv` to serve verbatim at /curve.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub retrain_batch: usize,
    #[arg(long, default_value_t = 2000)]
    pub stop_set_size: usize,
    #[arg(long, default_value_t = 0.99)]
    pub stop_threshold: f64,
    #[arg(long, default_value_t = 3)]
    pub stop_window: usize,
    #[command(flatten)]
    pub norm: NormArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    pub size: usize,
    #[arg(long, default_value_t = 0.62)]
    pub relevant_rate: f64,
    #[arg(long, default_value_t = 0.02)]
    pub label_noise: f64,
    #[command(flatten)]
    pub common: Common,
}

/// Parses `argv` (program name first), runs the command, and returns the
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

pub fn execute(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Preprocess(a) => preprocess(cmd, a),
        Command::Vocab(a) => vocab(cmd, a),
        Command::Train(a) => train(cmd, a),
        Command::Eval(a) => eval(cmd, a),
        Command::Curve(a) => curve(cmd, a),
        Command::Sweep(a) => sweep(cmd, a),
        Command::Regress(a) => regress(cmd, a),
        Command::Serve(a) => serve(cmd, a),
        Command::Synth(a) => synth_cmd(cmd, a),
    }
}

fn out_file(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(contents).map_err(|e| Error::io(&path, e))
}

/// Reads JSON-lines records, failing on the first malformed line.
pub fn read_corpus(path: &Path) -> Result<Vec<AnalyzedTweet>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let out = ingest::parse_records(BufReader::new(f), RecordFormat::JsonLines)?;
    match out.errors.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(out.records),
    }
}

fn require_labels(corpus: &[AnalyzedTweet]) -> Result<()> {
    match corpus.iter().find(|t| t.label().is_none()) {
        Some(t) => Err(Error::InvalidArgument(format!("tweet {} has no label", t.id()))),
        None if corpus.is_empty() => Err(Error::EmptyInput("corpus")),
        None => Ok(()),
    }
}

fn preprocess(cmd: &Command, a: &PreprocessArgs) -> Result<()> {
    let norm = a.norm.load()?;
    let f = File::open(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let format = match a.format {
        InputFormat::Jsonl => RecordFormat::JsonLines,
        InputFormat::Text => RecordFormat::PlainText,
    };
    let parsed = ingest::parse_records(BufReader::new(f), format)?;
    let mut report = String::new();
    let mut stage = |name: &str, n: usize| report.push_str(&format!("{name}\t{n}\n"));
    stage("read", parsed.records.len() + parsed.errors.len());
    for e in &parsed.errors {
        log::warn!("{}: {e}", a.input.display());
    }
    stage("malformed", parsed.errors.len());

    let mut recs: Vec<AnalyzedTweet> = parsed.records.iter().map(|r| ingest::preprocess(r, &norm)).collect();
    stage("parsed", recs.len());
    if let Some(k) = &a.keywords {
        recs = ingest::keyword_prefilter(recs, &resources::load_word_list(k)?)?;
        stage("keyword", recs.len());
    }
    recs = ingest::blocked_filter(recs, &norm.blocked_keywords);
    stage("blocked", recs.len());
    if !a.all_scripts {
        recs = ingest::script_filter(recs, &norm.allowed_scripts);
        stage("script", recs.len());
    }
    recs = ingest::deduplicate(recs);
    stage("dedup", recs.len());
    if let Some(n) = a.sample {
        recs = ingest::stratified_sample(&recs, n, a.common.seed)?;
        stage("sample", recs.len());
    }

    let mut buf = Vec::new();
    ingest::write_records(&mut buf, &recs).map_err(|e| Error::io(&a.common.out_dir, e))?;
    out_file(&a.common.out_dir, "records.jsonl", &buf)?;
    out_file(&a.common.out_dir, "preprocess.tsv", report.as_bytes())?;
    let mut inputs = vec![("input", a.input.as_path())];
    inputs.extend(a.keywords.as_deref().map(|p| ("keywords", p)));
    inputs.extend(a.norm.files());
    RunManifest::new(cmd, a.common.seed, &inputs)?.write(&a.common.out_dir)
}

fn vocab(cmd: &Command, a: &VocabArgs) -> Result<()> {
    let corpus = read_corpus(&a.input)?;
    let v = build_vocabulary(&corpus, &a.features.config())?;
    out_file(&a.common.out_dir, "vocab.tsv", v.to_text().as_bytes())?;
    RunManifest::new(cmd, a.common.seed, &[("input", &a.input)])?.write(&a.common.out_dir)
}

#[derive(Serialize)]
struct TrainSummary {
    examples: usize,
    vocab_size: usize,
    c: f64,
    epochs: usize,
    converged: bool,
    violation: f64,
    primal: f64,
    gap: f64,
}

fn train(cmd: &Command, a: &TrainCmd) -> Result<()> {
    let corpus = read_corpus(&a.input)?;
    require_labels(&corpus)?;
    let v = build_vocabulary(&corpus, &a.features.config())?;
    let examples: Vec<_> = corpus
        .iter()
        .map(|t| (v.vectorize(t), t.label().expect("checked")))
        .collect();
    let (model, report) = svm::train_with_report(&examples, v.len() as u32, &a.svm.config(a.common.seed))?;
    if !report.converged {
        log::warn!(
            "training stopped after {} epochs without reaching the tolerance",
            report.epochs
        );
    }
    let summary = TrainSummary {
        examples: examples.len(),
        vocab_size: v.len(),
        c: report.c,
        epochs: report.epochs,
        converged: report.converged,
        violation: report.violation,
        primal: report.primal,
        gap: report.gap,
    };
    let dir = &a.common.out_dir;
    out_file(dir, "vocab.tsv", v.to_text().as_bytes())?;
    out_file(dir, "model.txt", model.to_text().as_bytes())?;
    out_file(
        dir,
        "train.json",
        (serde_json::to_string_pretty(&summary)? + "\n").as_bytes(),
    )?;
    RunManifest::new(cmd, a.common.seed, &[("input", &a.input)])?.write(dir)
}

fn eval(cmd: &Command, a: &EvalArgs) -> Result<()> {
    let corpus = read_corpus(&a.input)?;
    require_labels(&corpus)?;
    let feats = a.features.config();
    let train_cfg = a.svm.config(a.common.seed);
    let results = harness::with_jobs(a.jobs.jobs, || {
        harness::cross_validate(&corpus, a.folds, a.common.seed, &feats, &train_cfg)
    })??;
    let report = harness::cv_report(&results);
    print!("{report}");
    out_file(&a.common.out_dir, "eval.tsv", report.as_bytes())?;
    let seeds = (0..a.folds as u64)
        .map(|f| rng::derive(a.common.seed, 100 + f))
        .collect();
    RunManifest::new(cmd, a.common.seed, &[("input", &a.input)])?
        .with_derived_seeds(seeds)
        .write(&a.common.out_dir)
}

fn curve(cmd: &Command, a: &CurveArgs) -> Result<()> {
    let corpus = read_corpus(&a.input)?;
    require_labels(&corpus)?;
    let folds = harness::kfold_split(corpus.len(), a.folds, a.common.seed)?;
    let fold_ids: Vec<usize> = match a.fold {
        Some(f) if f >= a.folds => return Err(Error::InvalidArgument(format!("fold {f} outside 0..{}", a.folds))),
        Some(f) => vec![f],
        None => (0..a.folds).collect(),
    };
    let strategies: &[Strategy] = match a.strategy {
        StrategyArg::Random => &[Strategy::Random],
        StrategyArg::Active => &[Strategy::Active],
        StrategyArg::Both => &[Strategy::Random, Strategy::Active],
    };
    let parts: Vec<(Vec<AnalyzedTweet>, Vec<AnalyzedTweet>)> = (0..a.folds)
        .map(|f| {
            if fold_ids.contains(&f) {
                harness::fold_partition(&corpus, &folds, f)
            } else {
                (Vec::new(), Vec::new())
            }
        })
        .collect();
    let mut jobs = Vec::new();
    for &f in &fold_ids {
        for &s in strategies {
            let seed = rng::derive(a.common.seed, f as u64);
            let cfg = CurveConfig {
                schedule: CurveSchedule::new(parts[f].0.len(), a.points, a.start_size, s, seed)?,
                train: a.svm.config(seed),
                features: a.features.config(),
                stop: StopParams {
                    threshold: a.stop_threshold,
                    window: a.stop_window,
                },
                fold: f,
            };
            jobs.push(cfg);
        }
    }
    let curves: Vec<Curve> = harness::with_jobs(a.jobs.jobs, || {
        use rayon::prelude::*;
        jobs.par_iter()
            .map(|cfg| harness::run_curve(&parts[cfg.fold].0, &parts[cfg.fold].1, None, cfg))
            .collect::<Result<Vec<_>>>()
    })??;

    let dir = &a.common.out_dir;
    out_file(dir, "curve.tsv", harness::curve_lines(&curves).as_bytes())?;
    let ids = |fold: usize, i: usize| parts[fold].0[i].id().to_string();
    out_file(
        dir,
        "membership.tsv",
        harness::membership_lines(&curves, ids).as_bytes(),
    )?;
    let mut stops = String::from("strategy\tfold\tstop_size\tstop_f1\tfinal_size\tfinal_f1\n");
    for c in &curves {
        let last = c.points.last().expect("schedules have at least 2 points");
        let (size, f1) = match c.stop_point() {
            Some(i) => (c.points[i].size.to_string(), format!("{:.6}", c.points[i].f1)),
            None => ("NA".into(), "NA".into()),
        };
        stops.push_str(&format!(
            "{}\t{}\t{size}\t{f1}\t{}\t{:.6}\n",
            c.strategy, c.fold, last.size, last.f1
        ));
    }
    out_file(dir, "stopping.tsv", stops.as_bytes())?;
    let seeds = fold_ids.iter().map(|&f| rng::derive(a.common.seed, f as u64)).collect();
    RunManifest::new(cmd, a.common.seed, &[("input", &a.input)])?
        .with_derived_seeds(seeds)
        .write(dir)
}

/// Scores for every corpus item: from a saved model, or out-of-fold.
fn scores_for(
    corpus: &[AnalyzedTweet],
    src: &ScoreSource,
    features: &FeatureArgs,
    svm_args: &SvmArgs,
    common: &Common,
    jobs: &Jobs,
) -> Result<Vec<f64>> {
    match (&src.model, &src.vocab) {
        (Some(m), Some(v)) => {
            let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
            let vocab = Vocabulary::from_text(&read(v)?)?;
            let model = LinearModel::from_text(&read(m)?, Some(vocab.len() as u32))?;
            let t = Trained { vocab, model };
            Ok(corpus.iter().map(|x| t.score(x)).collect())
        }
        _ => {
            let feats = features.config();
            let cfg = svm_args.config(common.seed);
            harness::with_jobs(jobs.jobs, || {
                harness::out_of_fold_scores(corpus, src.folds, common.seed, &feats, &cfg)
            })?
        }
    }
}

fn scored_items(corpus: &[AnalyzedTweet], scores: &[f64]) -> Vec<ScoredItem> {
    corpus
        .iter()
        .zip(scores)
        .map(|(t, &s)| ScoredItem::new(s, t.label().expect("checked")))
        .collect()
}

fn scores_tsv(corpus: &[AnalyzedTweet], scores: &[f64]) -> String {
    let mut s = String::from("id\tscore\tgold\n");
    for (t, v) in corpus.iter().zip(scores) {
        s.push_str(&format!("{}\t{v:.6}\t{}\n", t.id(), t.label().expect("checked")));
    }
    s
}

fn score_inputs<'a>(input: &'a Path, src: &'a ScoreSource) -> Vec<(&'static str, &'a Path)> {
    let mut v = vec![("input", input)];
    v.extend(src.model.as_deref().map(|p| ("model", p)));
    v.extend(src.vocab.as_deref().map(|p| ("vocab", p)));
    v
}

fn sweep(cmd: &Command, a: &SweepArgs) -> Result<()> {
    let corpus = read_corpus(&a.input)?;
    require_labels(&corpus)?;
    let scores = scores_for(&corpus, &a.scores, &a.features, &a.svm, &a.common, &a.jobs)?;
    let rows = confidence::sweep_thresholds(&scored_items(&corpus, &scores), &a.grid.0)?;
    let dir = &a.common.out_dir;
    out_file(dir, "sweep.tsv", confidence::sweep_lines(&rows).as_bytes())?;
    out_file(dir, "scores.tsv", scores_tsv(&corpus, &scores).as_bytes())?;
    RunManifest::new(cmd, a.common.seed, &score_inputs(&a.input, &a.scores))?.write(dir)
}

fn regress(cmd: &Command, a: &RegressArgs) -> Result<()> {
    let corpus = read_corpus(&a.input)?;
    require_labels(&corpus)?;
    let scores = scores_for(&corpus, &a.scores, &a.features, &a.svm, &a.common, &a.jobs)?;
    let report = confidence::regress_accuracy(&scored_items(&corpus, &scores))?;
    let dir = &a.common.out_dir;
    let text = confidence::regression_text(&report);
    print!("{text}");
    out_file(dir, "regress.txt", text.as_bytes())?;
    out_file(
        dir,
        "regress.json",
        (serde_json::to_string_pretty(&report)? + "\n").as_bytes(),
    )?;
    out_file(dir, "scores.tsv", scores_tsv(&corpus, &scores).as_bytes())?;
    RunManifest::new(cmd, a.common.seed, &score_inputs(&a.input, &a.scores))?.write(dir)
}

fn serve(cmd: &Command, a: &ServeArgs) -> Result<()> {
    let dir = &a.common.out_dir;
    let config = SessionConfig {
        retrain_batch: a.retrain_batch,
        stop_set_size: a.stop_set_size,
        seed: a.common.seed,
        features: a.features.config(),
        train: a.svm.config(a.common.seed),
        stop: StopParams {
            threshold: a.stop_threshold,
            window: a.stop_window,
        },
        normalization: a.norm.load()?,
    };
    let load = || {
        let pool = read_corpus(&a.input)?;
        let holdout = match &a.holdout {
            Some(p) => read_corpus(p)?,
            None => Vec::new(),
        };
        Ok((pool, holdout))
    };
    let fresh = !dir.join("session.json").exists();
    let session = Arc::new(Session::open_or_create(dir, load, config)?);
    if fresh {
        let mut inputs = vec![("input", a.input.as_path())];
        inputs.extend(a.holdout.as_deref().map(|p| ("holdout", p)));
        inputs.extend(a.norm.files());
        RunManifest::new(cmd, a.common.seed, &inputs)?.write(dir)?;
    }
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::io(dir, e))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&a.listen)
            .await
            .map_err(|e| Error::io(PathBuf::from(&a.listen), e))?;
        let addr = listener.local_addr().map_err(|e| Error::io(dir, e))?;
        eprintln!("listening on http://{addr}");
        let state = service::http::AppState {
            session,
            curve: a.curve.clone(),
        };
        service::http::serve(state, listener)
            .await
            .map_err(|e| Error::io(PathBuf::from(&a.listen), e))
    })
}

fn synth_cmd(cmd: &Command, a: &SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        size: a.size,
        relevant_rate: a.relevant_rate,
        label_noise: a.label_noise,
        seed: a.common.seed,
        ..SynthConfig::default()
    };
    let corpus = synth::generate(&cfg)?;
    let mut buf = Vec::new();
    ingest::write_records(&mut buf, &corpus).map_err(|e| Error::io(&a.common.out_dir, e))?;
    out_file(&a.common.out_dir, "corpus.jsonl", &buf)?;
    RunManifest::new(cmd, a.common.seed, &[])?.write(&a.common.out_dir)
}
