//! Persistent annotation session: an uncertainty-ranked labeling queue,
//! an append-only label log, periodic full retraining, and the
//! kappa-stabilization stop signal.
//!
//! Session directory layout:
//!
//! - `session.json`: configuration and the frozen stop set.
//! - `pool.jsonl`, `holdout.jsonl`: normalized records.
//! - `labels.log`: one JSON label record per line, synced before each ack.
//! - `snapshot.json`: latest model and vocabulary, replaced atomically.
//! - `kappas.log`: one JSON line per retrain with the kappa against the
//!   previous model.

pub mod http;

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureConfig, Vocabulary};
use crate::harness::{self, evaluate, select_uncertain_scores, StopParams, StoppingState, Trained};
use crate::ingest::{self, preprocess, AnalyzedTweet, Label, NormalizationConfig, RecordFormat};
use crate::metrics::{cohen_kappa, Prf};
use crate::rng;
use crate::svm::{label_for_score, LinearModel, TrainConfig};

const SESSION_FILE: &str = "session.json";
const POOL_FILE: &str = "pool.jsonl";
const HOLDOUT_FILE: &str = "holdout.jsonl";
const LABELS_FILE: &str = "labels.log";
const SNAPSHOT_FILE: &str = "snapshot.json";
const KAPPAS_FILE: &str = "kappas.log";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub retrain_batch: usize,
    pub stop_set_size: usize,
    pub seed: u64,
    pub features: FeatureConfig,
    pub train: TrainConfig,
    pub stop: StopParams,
    pub normalization: NormalizationConfig,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            retrain_batch: 50,
            stop_set_size: 2000,
            seed: 0,
            features: FeatureConfig::preset("lex1").expect("lex1 is a preset"),
            train: TrainConfig::default(),
            stop: StopParams::default(),
            normalization: NormalizationConfig::default(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SessionFile {
    format: u32,
    config: SessionConfig,
    stop_set: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub id: String,
    pub label: Label,
    pub annotator: String,
    /// Milliseconds since the Unix epoch.
    pub ts: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelAck {
    pub ack: bool,
    pub labeled_count: usize,
    pub retrain_scheduled: bool,
    /// The id already had a label; the new one wins for training.
    pub supersedes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Status {
    pub labeled: usize,
    pub remaining: usize,
    pub kappas: Vec<f64>,
    pub stop_recommended: bool,
    pub model_version: u64,
    pub label_records: usize,
    pub trained_count: usize,
    pub retraining: bool,
    pub pool_exhausted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holdout: Option<Prf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueItem {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredTweet {
    pub id: String,
    pub text: String,
    pub score: f64,
}

/// Three-way split of scored tweets. The lists are disjoint and together
/// hold every input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterResult {
    /// `score ≥ threshold`, highest first.
    pub relevant: Vec<ScoredTweet>,
    /// `score ≤ −threshold` and not relevant, lowest first.
    pub irrelevant: Vec<ScoredTweet>,
    /// Everything else, in input order.
    pub uncertain: Vec<ScoredTweet>,
}

/// Splits by score. `limit` keeps only the highest-scoring relevant items;
/// the rest are dropped from the result.
pub fn partition(scored: Vec<ScoredTweet>, threshold: f64, limit: Option<usize>) -> Result<FilterResult> {
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be finite and ≥ 0, got {threshold}"
        )));
    }
    let mut out = FilterResult {
        relevant: Vec::new(),
        irrelevant: Vec::new(),
        uncertain: Vec::new(),
    };
    for t in scored {
        if t.score >= threshold {
            out.relevant.push(t);
        } else if t.score <= -threshold {
            out.irrelevant.push(t);
        } else {
            out.uncertain.push(t);
        }
    }
    out.relevant.sort_by(|a, b| b.score.total_cmp(&a.score));
    out.irrelevant.sort_by(|a, b| a.score.total_cmp(&b.score));
    if let Some(n) = limit {
        out.relevant.truncate(n);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct SnapshotFile {
    version: u64,
    trained_count: usize,
    kappas: Vec<f64>,
    vocab: String,
    model: String,
}

#[derive(Serialize, Deserialize)]
struct KappaLine {
    version: u64,
    trained_count: usize,
    kappa: f64,
}

/// An immutable trained state. Readers hold an `Arc` and never see a
/// partially built one.
#[derive(Debug)]
pub struct Snapshot {
    pub version: u64,
    /// Length of the label-log prefix this model was trained on.
    pub trained_count: usize,
    pub trained: Trained,
    pub pool_scores: Vec<f64>,
    pub stop_predictions: Vec<Label>,
    pub holdout: Option<Prf>,
}

struct State {
    log: Vec<LabelRecord>,
    log_file: File,
    /// Latest label per pool index.
    latest: HashMap<usize, Label>,
    stopping: StoppingState,
    kappas_file: File,
    /// Log length at which the last retrain was requested.
    scheduled_at: usize,
    pending: bool,
    retraining: bool,
}

pub struct Session {
    dir: PathBuf,
    config: SessionConfig,
    pool: Vec<AnalyzedTweet>,
    index: HashMap<String, usize>,
    holdout: Vec<AnalyzedTweet>,
    stop_set: Vec<usize>,
    cold_order: Vec<usize>,
    snapshot: RwLock<Option<Arc<Snapshot>>>,
    state: Mutex<State>,
}

fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

fn read_records(path: &Path) -> Result<Vec<AnalyzedTweet>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let out = ingest::parse_records(BufReader::new(f), RecordFormat::JsonLines)?;
    if let Some(e) = out.errors.into_iter().next() {
        return Err(e);
    }
    Ok(out.records)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    sync_dir(path.parent().unwrap_or(Path::new(".")));
    Ok(())
}

fn sync_dir(dir: &Path) {
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
}

fn open_append(path: &Path) -> Result<File> {
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))
}

fn append_line(file: &mut File, path: &Path, line: &str) -> Result<()> {
    let mut buf = Vec::with_capacity(line.len() + 1);
    buf.extend_from_slice(line.as_bytes());
    buf.push(b'\n');
    file.write_all(&buf).map_err(|e| Error::io(path, e))?;
    file.sync_data().map_err(|e| Error::io(path, e))
}

/// Reads a JSON-lines log. A malformed final line without a trailing
/// newline is a write cut short by a crash: it was never acknowledged, so
/// it is dropped and the file truncated to the last complete line.
fn read_log<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    if complete < bytes.len() {
        log::warn!("{}: dropping incomplete final line", path.display());
        let f = OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        f.set_len(complete as u64).map_err(|e| Error::io(path, e))?;
        f.sync_all().map_err(|e| Error::io(path, e))?;
    }
    let mut out = Vec::new();
    for (i, line) in bytes[..complete].lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Record {
            line: i + 1,
            message: format!("{}: {e}", path.display()),
        })?);
    }
    Ok(out)
}

impl Session {
    /// Creates a new session directory. Pool and holdout records are
    /// normalized with the session's configuration; holdout records must be
    /// labeled. Fails if the directory already holds a session.
    pub fn create(
        dir: &Path,
        pool: Vec<AnalyzedTweet>,
        holdout: Vec<AnalyzedTweet>,
        config: SessionConfig,
    ) -> Result<Session> {
        config.normalization.validate()?;
        config.features.validate()?;
        config.train.validate()?;
        if config.retrain_batch == 0 {
            return Err(Error::Config("retrain batch must be positive".into()));
        }
        if pool.is_empty() {
            return Err(Error::EmptyInput("pool"));
        }
        if let Some(t) = holdout.iter().find(|t| t.label().is_none()) {
            return Err(Error::InvalidArgument(format!("holdout tweet {} has no label", t.id())));
        }
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let session_path = dir.join(SESSION_FILE);
        if session_path.exists() {
            return Err(Error::InvalidArgument(format!(
                "{} already holds a session",
                dir.display()
            )));
        }

        let norm = |v: Vec<AnalyzedTweet>| -> Vec<AnalyzedTweet> {
            v.iter().map(|t| preprocess(t, &config.normalization)).collect()
        };
        let pool = norm(pool);
        let holdout = norm(holdout);
        let mut seen = HashMap::new();
        for (i, t) in pool.iter().enumerate() {
            if let Some(first) = seen.insert(t.id().to_string(), i) {
                return Err(Error::DuplicateId {
                    id: t.id().to_string(),
                    first: first + 1,
                    second: i + 1,
                });
            }
        }

        let mut stop: Vec<usize> = (0..pool.len()).collect();
        stop.shuffle(&mut rng::from_seed(rng::derive(config.seed, 11)));
        stop.truncate(config.stop_set_size.min(pool.len()));
        stop.sort_unstable();

        let mut buf = Vec::new();
        ingest::write_records(&mut buf, &pool).map_err(|e| Error::io(dir, e))?;
        write_atomic(&dir.join(POOL_FILE), &buf)?;
        let mut buf = Vec::new();
        ingest::write_records(&mut buf, &holdout).map_err(|e| Error::io(dir, e))?;
        write_atomic(&dir.join(HOLDOUT_FILE), &buf)?;
        let file = SessionFile {
            format: 1,
            stop_set: stop.iter().map(|&i| pool[i].id().to_string()).collect(),
            config,
        };
        // session.json last: its presence marks a complete session.
        write_atomic(&session_path, serde_json::to_string_pretty(&file)?.as_bytes())?;
        Session::open(dir)
    }

    /// Reopens a session. The stored snapshot is checked by retraining from
    /// the same label-log prefix; a pending retrain is reported by
    /// [`Session::retrain_pending`].
    pub fn open(dir: &Path) -> Result<Session> {
        let session_path = dir.join(SESSION_FILE);
        let text = fs::read_to_string(&session_path).map_err(|e| Error::io(&session_path, e))?;
        let file: SessionFile = serde_json::from_str(&text)?;
        let config = file.config;
        let pool = read_records(&dir.join(POOL_FILE))?;
        let holdout = read_records(&dir.join(HOLDOUT_FILE))?;
        let index: HashMap<String, usize> = pool.iter().enumerate().map(|(i, t)| (t.id().to_string(), i)).collect();
        let stop_set = file
            .stop_set
            .iter()
            .map(|id| index.get(id).copied().ok_or_else(|| Error::UnknownId(id.clone())))
            .collect::<Result<Vec<_>>>()?;
        let mut cold_order: Vec<usize> = (0..pool.len()).collect();
        cold_order.shuffle(&mut rng::from_seed(rng::derive(config.seed, 7)));

        let labels_path = dir.join(LABELS_FILE);
        let log: Vec<LabelRecord> = read_log(&labels_path)?;
        let mut latest = HashMap::new();
        for r in &log {
            let i = *index.get(&r.id).ok_or_else(|| Error::UnknownId(r.id.clone()))?;
            latest.insert(i, r.label);
        }
        let kappas_path = dir.join(KAPPAS_FILE);
        let kappa_lines: Vec<KappaLine> = read_log(&kappas_path)?;

        let mut session = Session {
            dir: dir.to_path_buf(),
            stop_set,
            cold_order,
            snapshot: RwLock::new(None),
            state: Mutex::new(State {
                log,
                log_file: open_append(&labels_path)?,
                latest,
                stopping: StoppingState::new(config.stop.window, config.stop.threshold),
                kappas_file: open_append(&kappas_path)?,
                scheduled_at: 0,
                pending: false,
                retraining: false,
            }),
            config,
            pool,
            index,
            holdout,
        };

        let snapshot_path = dir.join(SNAPSHOT_FILE);
        let mut kappas = Vec::new();
        if snapshot_path.exists() {
            let text = fs::read_to_string(&snapshot_path).map_err(|e| Error::io(&snapshot_path, e))?;
            let file: SnapshotFile = serde_json::from_str(&text)?;
            let stored = Trained {
                vocab: Vocabulary::from_text(&file.vocab)?,
                model: LinearModel::from_text(&file.model, None)?,
            };
            let log_len = session.lock().log.len();
            if file.trained_count > log_len {
                return Err(Error::ModelFormat(format!(
                    "snapshot trained on {} labels but the log has {log_len}",
                    file.trained_count
                )));
            }
            let trained = match session.train_prefix(file.trained_count)? {
                Some(t) if t.model == stored.model && t.vocab.to_text() == file.vocab => t,
                Some(t) => {
                    log::warn!("stored model differs from a retrain on the same labels; using the retrained one");
                    t
                }
                None => {
                    return Err(Error::ModelFormat(
                        "snapshot exists but its labels cannot train a model".into(),
                    ))
                }
            };
            let snap = session.build_snapshot(file.version, file.trained_count, trained);
            *session.snapshot.get_mut().expect("fresh lock") = Some(Arc::new(snap));
            kappas = file.kappas;
        }

        {
            let st = session.state.get_mut().expect("fresh lock");
            for &k in &kappas {
                st.stopping.push(k);
            }
            // Mirror any history the kappa log missed before a crash.
            let version = session
                .snapshot
                .get_mut()
                .expect("fresh lock")
                .as_ref()
                .map_or(0, |s| s.version);
            let logged = kappa_lines.len();
            if logged < kappas.len() {
                for (j, &k) in kappas.iter().enumerate().skip(logged) {
                    let line = KappaLine {
                        version: version - (kappas.len() - 1 - j) as u64,
                        trained_count: 0,
                        kappa: k,
                    };
                    append_line(&mut st.kappas_file, &kappas_path, &serde_json::to_string(&line)?)?;
                }
            }
            let trained = session
                .snapshot
                .get_mut()
                .expect("fresh lock")
                .as_ref()
                .map_or(0, |s| s.trained_count);
            // The batch rule schedules retrains at multiples of the batch
            // size; a snapshot older than the last such point means a
            // scheduled retrain never finished.
            let batch = session.config.retrain_batch;
            st.scheduled_at = st.log.len() / batch * batch;
            st.pending = trained < st.scheduled_at;
        }
        Ok(session)
    }

    /// Opens the session in `dir` if there is one, otherwise creates it.
    pub fn open_or_create(
        dir: &Path,
        pool: impl FnOnce() -> Result<(Vec<AnalyzedTweet>, Vec<AnalyzedTweet>)>,
        config: SessionConfig,
    ) -> Result<Session> {
        if dir.join(SESSION_FILE).exists() {
            Session::open(dir)
        } else {
            let (p, h) = pool()?;
            Session::create(dir, p, h, config)
        }
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn pool(&self) -> &[AnalyzedTweet] {
        &self.pool
    }

    pub fn stop_set(&self) -> &[usize] {
        &self.stop_set
    }

    pub fn snapshot(&self) -> Option<Arc<Snapshot>> {
        self.snapshot.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn labels(&self) -> Vec<LabelRecord> {
        self.lock().log.clone()
    }

    /// Up to `n` unlabeled tweets, most uncertain first. Without a model the
    /// order is a fixed seeded shuffle of the pool.
    pub fn next_batch(&self, n: usize) -> Vec<QueueItem> {
        let labeled: Vec<bool> = {
            let st = self.lock();
            let mut v = vec![false; self.pool.len()];
            for &i in st.latest.keys() {
                v[i] = true;
            }
            v
        };
        let picked: Vec<usize> = match self.snapshot() {
            None => self
                .cold_order
                .iter()
                .copied()
                .filter(|&i| !labeled[i])
                .take(n)
                .collect(),
            Some(snap) => {
                let open: Vec<usize> = (0..self.pool.len()).filter(|&i| !labeled[i]).collect();
                let scores: Vec<f64> = open.iter().map(|&i| snap.pool_scores[i]).collect();
                let n = n.min(open.len());
                if n == 0 {
                    Vec::new()
                } else {
                    select_uncertain_scores(&scores, n)
                        .expect("0 < n ≤ open items")
                        .into_iter()
                        .map(|j| open[j])
                        .collect()
                }
            }
        };
        picked
            .into_iter()
            .map(|i| QueueItem {
                id: self.pool[i].id().to_string(),
                text: self.pool[i].tweet.text.clone(),
            })
            .collect()
    }

    /// Appends a label and syncs it to disk before returning.
    pub fn submit_label(&self, id: &str, label: i64, annotator: &str) -> Result<LabelAck> {
        let label = Label::from_int(label).ok_or(Error::InvalidLabel(label))?;
        let &i = self.index.get(id).ok_or_else(|| Error::UnknownId(id.to_string()))?;
        let rec = LabelRecord {
            id: id.to_string(),
            label,
            annotator: annotator.to_string(),
            ts: now_millis(),
        };
        let line = serde_json::to_string(&rec)?;
        let path = self.dir.join(LABELS_FILE);
        let mut st = self.lock();
        append_line(&mut st.log_file, &path, &line)?;
        st.log.push(rec);
        let supersedes = st.latest.insert(i, label).is_some();
        let scheduled = st.log.len() - st.scheduled_at >= self.config.retrain_batch;
        if scheduled {
            st.scheduled_at = st.log.len();
            st.pending = true;
        }
        Ok(LabelAck {
            ack: true,
            labeled_count: st.latest.len(),
            retrain_scheduled: scheduled,
            supersedes,
        })
    }

    pub fn retrain_pending(&self) -> bool {
        self.lock().pending
    }

    /// Schedules a retrain on the whole current log regardless of the batch
    /// rule. The batch schedule itself is unchanged.
    pub fn request_retrain(&self) {
        self.lock().pending = true;
    }

    /// Runs pending retrains until none is left. Returns immediately when
    /// another thread is already retraining; that thread picks up the
    /// pending work. Returns the number of models installed.
    pub fn run_pending_retrains(&self) -> Result<usize> {
        let mut installed = 0;
        loop {
            let prefix = {
                let mut st = self.lock();
                if st.retraining || !st.pending {
                    return Ok(installed);
                }
                st.retraining = true;
                st.pending = false;
                st.log.len()
            };
            let result = self.retrain_on(prefix);
            let mut st = self.lock();
            st.retraining = false;
            match result {
                Ok(true) => installed += 1,
                Ok(false) => {}
                Err(e) => return Err(e),
            }
            drop(st);
        }
    }

    /// Training examples from the first `prefix` log records, latest label
    /// per id, in pool order.
    fn training_set(&self, prefix: usize) -> Vec<AnalyzedTweet> {
        let st = self.lock();
        let mut latest: HashMap<usize, Label> = HashMap::new();
        for r in &st.log[..prefix] {
            latest.insert(self.index[&r.id], r.label);
        }
        drop(st);
        let mut idx: Vec<usize> = latest.keys().copied().collect();
        idx.sort_unstable();
        idx.into_iter()
            .map(|i| {
                let mut t = self.pool[i].clone();
                t.tweet.label = Some(latest[&i]);
                t
            })
            .collect()
    }

    fn train_prefix(&self, prefix: usize) -> Result<Option<Trained>> {
        let set = self.training_set(prefix);
        let pos = set.iter().filter(|t| t.label() == Some(Label::Relevant)).count();
        if pos == 0 || pos == set.len() {
            return Ok(None);
        }
        let refs: Vec<&AnalyzedTweet> = set.iter().collect();
        harness::train_on(&refs, &self.config.features, &self.config.train).map(Some)
    }

    fn build_snapshot(&self, version: u64, trained_count: usize, trained: Trained) -> Snapshot {
        let pool_scores: Vec<f64> = self.pool.iter().map(|t| trained.score(t)).collect();
        let stop_predictions = self.stop_set.iter().map(|&i| label_for_score(pool_scores[i])).collect();
        let holdout = if self.holdout.is_empty() {
            None
        } else {
            evaluate(&trained, &self.holdout).ok().map(|(m, _)| m)
        };
        Snapshot {
            version,
            trained_count,
            trained,
            pool_scores,
            stop_predictions,
            holdout,
        }
    }

    fn retrain_on(&self, prefix: usize) -> Result<bool> {
        let Some(trained) = self.train_prefix(prefix)? else {
            log::info!("retrain skipped: {prefix} labels do not cover both classes yet");
            return Ok(false);
        };
        let prev = self.snapshot();
        let version = prev.as_ref().map_or(0, |s| s.version) + 1;
        let snap = self.build_snapshot(version, prefix, trained);
        let kappa = match &prev {
            Some(p) => Some(cohen_kappa(&p.stop_predictions, &snap.stop_predictions)?),
            None => None,
        };

        let mut st = self.lock();
        let mut kappas = st.stopping.history.clone();
        kappas.extend(kappa);
        let file = SnapshotFile {
            version,
            trained_count: prefix,
            kappas,
            vocab: snap.trained.vocab.to_text(),
            model: snap.trained.model.to_text(),
        };
        write_atomic(&self.dir.join(SNAPSHOT_FILE), serde_json::to_string(&file)?.as_bytes())?;
        if let Some(k) = kappa {
            let line = KappaLine {
                version,
                trained_count: prefix,
                kappa: k,
            };
            let path = self.dir.join(KAPPAS_FILE);
            append_line(&mut st.kappas_file, &path, &serde_json::to_string(&line)?)?;
            st.stopping.push(k);
        }
        *self.snapshot.write().unwrap_or_else(|e| e.into_inner()) = Some(Arc::new(snap));
        log::info!("model v{version} trained on {prefix} label records");
        Ok(true)
    }

    pub fn status(&self) -> Status {
        let snap = self.snapshot();
        let st = self.lock();
        let labeled = st.latest.len();
        Status {
            labeled,
            remaining: self.pool.len() - labeled,
            kappas: st.stopping.recent().to_vec(),
            stop_recommended: st.stopping.fired(),
            model_version: snap.as_ref().map_or(0, |s| s.version),
            label_records: st.log.len(),
            trained_count: snap.as_ref().map_or(0, |s| s.trained_count),
            retraining: st.retraining,
            pool_exhausted: labeled == self.pool.len(),
            holdout: snap.as_ref().and_then(|s| s.holdout),
        }
    }

    /// Full kappa history, oldest first.
    pub fn kappa_history(&self) -> Vec<f64> {
        self.lock().stopping.history.clone()
    }

    /// Normalizes and scores new tweets with the current model, then splits
    /// them by `threshold`.
    pub fn filter(&self, tweets: &[AnalyzedTweet], threshold: f64, limit: Option<usize>) -> Result<FilterResult> {
        let snap = self.snapshot().ok_or(Error::Untrained)?;
        let scored = tweets
            .iter()
            .map(|t| {
                let clean = preprocess(t, &self.config.normalization);
                ScoredTweet {
                    id: t.id().to_string(),
                    text: t.tweet.text.clone(),
                    score: snap.trained.score(&clean),
                }
            })
            .collect();
        partition(scored, threshold, limit)
    }
}
