//! Learning-curve experiments: k-fold splits, random and uncertainty-driven
//! training schedules, and the kappa-stabilization stopping rule.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{build_vocabulary, FeatureConfig, FeatureVector, Vocabulary};
use crate::ingest::{AnalyzedTweet, Label};
use crate::metrics::{cohen_kappa, prf, ConfusionCounts, Prf};
use crate::rng;
use crate::svm::{self, label_for_score, LinearModel, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Active,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Random => "random",
            Strategy::Active => "active",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Strategy::Random),
            "active" => Ok(Strategy::Active),
            _ => Err(Error::InvalidArgument(format!("unknown strategy {s:?}"))),
        }
    }
}

/// Randomly partitions `0..n` into `k` folds. The first `n % k` folds get one
/// extra item. Fold members are sorted.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(Error::InvalidArgument(format!("{k} folds over {n} items")));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::from_seed(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut at = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold = perm[at..at + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        at += len;
    }
    Ok(folds)
}

/// `n_points` sizes evenly spaced from `start_size` to `pool_size`, rounded
/// half up.
pub fn make_sizes(pool_size: usize, n_points: usize, start_size: usize) -> Result<Vec<usize>> {
    if n_points < 2 {
        return Err(Error::InvalidArgument("a schedule needs at least 2 points".into()));
    }
    if start_size == 0 || start_size > pool_size {
        return Err(Error::InvalidArgument(format!(
            "start size {start_size} outside 1..={pool_size}"
        )));
    }
    let span = pool_size - start_size;
    let steps = n_points - 1;
    if span < steps {
        return Err(Error::InvalidArgument(format!(
            "cannot fit {n_points} distinct sizes between {start_size} and {pool_size}"
        )));
    }
    Ok((0..n_points)
        .map(|i| start_size + (2 * i * span + steps) / (2 * steps))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSchedule {
    pub sizes: Vec<usize>,
    pub strategy: Strategy,
    pub seed: u64,
}

impl CurveSchedule {
    /// `n_points` sizes over the pool; `start_size` defaults to
    /// `ceil(pool_size / n_points)`.
    pub fn new(
        pool_size: usize,
        n_points: usize,
        start_size: Option<usize>,
        strategy: Strategy,
        seed: u64,
    ) -> Result<Self> {
        let start = start_size.unwrap_or_else(|| pool_size.div_ceil(n_points.max(1)).max(1));
        Ok(CurveSchedule {
            sizes: make_sizes(pool_size, n_points, start)?,
            strategy,
            seed,
        })
    }

    pub fn validate(&self, pool_size: usize) -> Result<()> {
        match (self.sizes.first(), self.sizes.last()) {
            (Some(&first), Some(&last)) if first >= 1 && last <= pool_size => {}
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "schedule {:?} does not fit a pool of {pool_size}",
                    (self.sizes.first(), self.sizes.last())
                )))
            }
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "schedule sizes must be strictly increasing".into(),
            ));
        }
        Ok(())
    }
}

/// The `n` indices with the smallest `|score|`, ties to the lower index,
/// in that order.
pub fn select_uncertain_scores(scores: &[f64], n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidArgument("must select at least one item".into()));
    }
    if n > scores.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot select {n} of {} items",
            scores.len()
        )));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].abs().total_cmp(&scores[b].abs()).then(a.cmp(&b)));
    idx.truncate(n);
    Ok(idx)
}

pub fn select_uncertain(model: &LinearModel, pool: &[FeatureVector], n: usize) -> Result<Vec<usize>> {
    let scores = pool.iter().map(|x| model.score(x)).collect::<Result<Vec<_>>>()?;
    select_uncertain_scores(&scores, n)
}

/// Smallest `s` such that `history[s + 1 - window ..= s]` are all at or
/// above `threshold`.
pub fn stopping_check(history: &[f64], threshold: f64, window: usize) -> Option<usize> {
    let window = window.max(1);
    let mut run = 0;
    for (s, &k) in history.iter().enumerate() {
        run = if k >= threshold { run + 1 } else { 0 };
        if run >= window {
            return Some(s);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingState {
    pub window: usize,
    pub threshold: f64,
    pub history: Vec<f64>,
    /// Index into `history` where the rule first fired. Sticky.
    pub fired_at: Option<usize>,
}

impl Default for StoppingState {
    fn default() -> Self {
        StoppingState::new(3, 0.99)
    }
}

impl StoppingState {
    pub fn new(window: usize, threshold: f64) -> Self {
        StoppingState {
            window: window.max(1),
            threshold,
            history: Vec::new(),
            fired_at: None,
        }
    }

    /// Records a kappa value; returns true when this value makes the rule
    /// fire for the first time.
    pub fn push(&mut self, kappa: f64) -> bool {
        self.history.push(kappa);
        if self.fired_at.is_some() {
            return false;
        }
        let n = self.history.len();
        if n >= self.window && self.history[n - self.window..].iter().all(|&k| k >= self.threshold) {
            self.fired_at = Some(n - 1);
            return true;
        }
        false
    }

    pub fn fired(&self) -> bool {
        self.fired_at.is_some()
    }

    pub fn recent(&self) -> &[f64] {
        &self.history[self.history.len().saturating_sub(self.window)..]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub size: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub kappa_vs_prev: Option<f64>,
    pub stop_here: bool,
    /// Pool indices added at this point (the whole initial set at the first
    /// point).
    pub added: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub strategy: Strategy,
    pub fold: usize,
    pub points: Vec<CurvePoint>,
    pub stopping: StoppingState,
}

impl Curve {
    /// Index into `points` where the stopping rule fired.
    pub fn stop_point(&self) -> Option<usize> {
        self.points.iter().position(|p| p.stop_here)
    }

    /// The first point whose size reaches `size`.
    pub fn point_at_size(&self, size: usize) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.size >= size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopParams {
    pub threshold: f64,
    pub window: usize,
}

impl Default for StopParams {
    fn default() -> Self {
        StopParams {
            threshold: 0.99,
            window: 3,
        }
    }
}

/// Everything one curve run needs besides the data.
#[derive(Debug, Clone)]
pub struct CurveConfig {
    pub schedule: CurveSchedule,
    pub train: TrainConfig,
    pub features: FeatureConfig,
    pub stop: StopParams,
    pub fold: usize,
}

/// Trains on `examples`, falling back to a constant model when they hold a
/// single class.
pub fn fit(examples: &[(FeatureVector, Label)], vocab_size: u32, cfg: &TrainConfig) -> Result<LinearModel> {
    match svm::train(examples, vocab_size, cfg) {
        Err(Error::DegenerateTrainingSet(_)) if !examples.is_empty() => {
            let bias = examples[0].1.sign();
            Ok(LinearModel::new(vec![0.0; vocab_size as usize], bias))
        }
        other => other,
    }
}

/// A model with the vocabulary it was trained against.
#[derive(Debug, Clone)]
pub struct Trained {
    pub vocab: Vocabulary,
    pub model: LinearModel,
}

impl Trained {
    pub fn score(&self, t: &AnalyzedTweet) -> f64 {
        // Vectors built from the model's own vocabulary are always in range.
        self.model.score(&self.vocab.vectorize(t)).unwrap_or(0.0)
    }

    pub fn predict(&self, t: &AnalyzedTweet) -> Label {
        label_for_score(self.score(t))
    }
}

/// Builds the vocabulary from `train` alone, then fits.
pub fn train_on(train: &[&AnalyzedTweet], features: &FeatureConfig, cfg: &TrainConfig) -> Result<Trained> {
    let vocab = build_vocabulary(train.iter().copied(), features)?;
    let examples = train
        .iter()
        .map(|t| {
            let y = t
                .label()
                .ok_or_else(|| Error::InvalidArgument(format!("tweet {} has no label", t.id())))?;
            Ok((vocab.vectorize(t), y))
        })
        .collect::<Result<Vec<_>>>()?;
    let model = fit(&examples, vocab.len() as u32, cfg)?;
    Ok(Trained { vocab, model })
}

pub fn evaluate(trained: &Trained, test: &[AnalyzedTweet]) -> Result<(Prf, Vec<Label>)> {
    let mut counts = ConfusionCounts::default();
    let mut preds = Vec::with_capacity(test.len());
    for t in test {
        let gold = t
            .label()
            .ok_or_else(|| Error::InvalidArgument(format!("test tweet {} has no label", t.id())))?;
        let p = trained.predict(t);
        counts.add(gold, p);
        preds.push(p);
    }
    Ok((prf(&counts)?, preds))
}

/// Runs one learning curve. The pool must be fully labeled. Kappa between
/// successive models is measured on `kappa_set`, or on the test fold when
/// it is `None`.
pub fn run_curve(
    pool: &[AnalyzedTweet],
    test: &[AnalyzedTweet],
    kappa_set: Option<&[AnalyzedTweet]>,
    cfg: &CurveConfig,
) -> Result<Curve> {
    let schedule = &cfg.schedule;
    schedule.validate(pool.len())?;
    if let Some(t) = pool.iter().find(|t| t.label().is_none()) {
        return Err(Error::InvalidArgument(format!("pool tweet {} has no label", t.id())));
    }
    let kappa_set = kappa_set.unwrap_or(test);

    let mut perm: Vec<usize> = (0..pool.len()).collect();
    perm.shuffle(&mut rng::from_seed(rng::derive(schedule.seed, 1)));
    let train_cfg = TrainConfig {
        seed: rng::derive(schedule.seed, 2),
        ..cfg.train.clone()
    };

    let mut in_train = vec![false; pool.len()];
    let mut stopping = StoppingState::new(cfg.stop.window, cfg.stop.threshold);
    let mut prev_preds: Option<Vec<Label>> = None;
    let mut points = Vec::with_capacity(schedule.sizes.len());
    let mut trained: Option<Trained> = None;

    for (j, &size) in schedule.sizes.iter().enumerate() {
        let current = points.iter().map(|p: &CurvePoint| p.added.len()).sum::<usize>();
        let need = size - current;
        let mut added = match (schedule.strategy, &trained) {
            (Strategy::Active, Some(model)) if j > 0 => {
                let remaining: Vec<usize> = (0..pool.len()).filter(|&i| !in_train[i]).collect();
                let scores: Vec<f64> = remaining.iter().map(|&i| model.score(&pool[i])).collect();
                select_uncertain_scores(&scores, need)?
                    .into_iter()
                    .map(|r| remaining[r])
                    .collect()
            }
            _ => perm[current..size].to_vec(),
        };
        added.sort_unstable();
        for &i in &added {
            in_train[i] = true;
        }

        let train_set: Vec<&AnalyzedTweet> = (0..pool.len()).filter(|&i| in_train[i]).map(|i| &pool[i]).collect();
        let model = train_on(&train_set, &cfg.features, &train_cfg)?;
        let (m, _) = evaluate(&model, test)?;
        let preds: Vec<Label> = kappa_set.iter().map(|t| model.predict(t)).collect();
        let kappa = match &prev_preds {
            Some(prev) => Some(cohen_kappa(prev, &preds)?),
            None => None,
        };
        let stop_here = kappa.is_some_and(|k| stopping.push(k));
        points.push(CurvePoint {
            size,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            accuracy: m.accuracy,
            kappa_vs_prev: kappa,
            stop_here,
            added,
        });
        prev_preds = Some(preds);
        trained = Some(model);
    }

    Ok(Curve {
        strategy: schedule.strategy,
        fold: cfg.fold,
        points,
        stopping,
    })
}

/// Splits `corpus` into `k` folds and returns `(pool, test)` for `fold`.
pub fn fold_partition(
    corpus: &[AnalyzedTweet],
    folds: &[Vec<usize>],
    fold: usize,
) -> (Vec<AnalyzedTweet>, Vec<AnalyzedTweet>) {
    let mut is_test = vec![false; corpus.len()];
    for &i in &folds[fold] {
        is_test[i] = true;
    }
    let (mut pool, mut test) = (Vec::new(), Vec::new());
    for (t, flag) in corpus.iter().zip(is_test) {
        if flag {
            test.push(t.clone());
        } else {
            pool.push(t.clone());
        }
    }
    (pool, test)
}

/// Runs `f` on a pool of `jobs` threads (all cores when `None`).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j.max(1));
    }
    let pool = b
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub vocab_size: usize,
    pub metrics: Prf,
}

/// k-fold cross-validation. Folds run in parallel; results come back in
/// fold order.
pub fn cross_validate(
    corpus: &[AnalyzedTweet],
    k: usize,
    seed: u64,
    features: &FeatureConfig,
    train: &TrainConfig,
) -> Result<Vec<FoldResult>> {
    let folds = kfold_split(corpus.len(), k, seed)?;
    (0..k)
        .into_par_iter()
        .map(|f| {
            let (pool, test) = fold_partition(corpus, &folds, f);
            let cfg = TrainConfig {
                seed: rng::derive(seed, 100 + f as u64),
                ..train.clone()
            };
            let refs: Vec<&AnalyzedTweet> = pool.iter().collect();
            let model = train_on(&refs, features, &cfg)?;
            let (metrics, _) = evaluate(&model, &test)?;
            Ok(FoldResult {
                fold: f,
                train_size: pool.len(),
                test_size: test.len(),
                vocab_size: model.vocab.len(),
                metrics,
            })
        })
        .collect()
}

/// Scores every item with a model trained on the other folds.
pub fn out_of_fold_scores(
    corpus: &[AnalyzedTweet],
    k: usize,
    seed: u64,
    features: &FeatureConfig,
    train: &TrainConfig,
) -> Result<Vec<f64>> {
    let folds = kfold_split(corpus.len(), k, seed)?;
    let per_fold = (0..k)
        .into_par_iter()
        .map(|f| {
            let (pool, test) = fold_partition(corpus, &folds, f);
            let cfg = TrainConfig {
                seed: rng::derive(seed, 100 + f as u64),
                ..train.clone()
            };
            let refs: Vec<&AnalyzedTweet> = pool.iter().collect();
            let model = train_on(&refs, features, &cfg)?;
            Ok(test.iter().map(|t| model.score(t)).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut scores = vec![0.0; corpus.len()];
    for (fold, s) in folds.iter().zip(per_fold) {
        for (&i, v) in fold.iter().zip(s) {
            scores[i] = v;
        }
    }
    Ok(scores)
}

/// Per-fold lines and the mean: `fold TAB precision TAB recall TAB f1 TAB accuracy`.
pub fn cv_report(results: &[FoldResult]) -> String {
    let mut s = String::from("fold\tprecision\trecall\tf1\taccuracy\n");
    let mut sum = [0.0; 4];
    for r in results {
        let m = &r.metrics;
        let v = [m.precision, m.recall, m.f1, m.accuracy];
        for (a, b) in sum.iter_mut().zip(v) {
            *a += b;
        }
        let _ = writeln!(s, "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}", r.fold, v[0], v[1], v[2], v[3]);
    }
    let n = results.len().max(1) as f64;
    let _ = writeln!(
        s,
        "mean\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
        sum[0] / n,
        sum[1] / n,
        sum[2] / n,
        sum[3] / n
    );
    s
}

/// `strategy TAB fold TAB size TAB precision TAB recall TAB f1 TAB kappa TAB stop_flag`,
/// with `NA` for the missing first kappa.
pub fn curve_lines(curves: &[Curve]) -> String {
    let mut s = String::new();
    for c in curves {
        for p in &c.points {
            let kappa = p.kappa_vs_prev.map_or("NA".to_string(), |k| format!("{k:.6}"));
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}",
                c.strategy,
                c.fold,
                p.size,
                p.precision,
                p.recall,
                p.f1,
                kappa,
                u8::from(p.stop_here)
            );
        }
    }
    s
}

/// One line per point: `strategy TAB fold TAB size`, then the ids added at
/// that point, tab-separated.
pub fn membership_lines(curves: &[Curve], pool_ids: impl Fn(usize, usize) -> String) -> String {
    let mut s = String::new();
    for c in curves {
        for p in &c.points {
            let _ = write!(s, "{}\t{}\t{}", c.strategy, c.fold, p.size);
            for &i in &p.added {
                s.push('\t');
                s.push_str(&pool_ids(c.fold, i));
            }
            s.push('\n');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kfold_sizes_and_partition() {
        let f = kfold_split(20, 10, 1).unwrap();
        assert!(f.iter().all(|x| x.len() == 2));
        let f = kfold_split(21, 10, 1).unwrap();
        let mut lens: Vec<usize> = f.iter().map(Vec::len).collect();
        lens.sort();
        assert_eq!(lens, [2, 2, 2, 2, 2, 2, 2, 2, 2, 3]);
        let mut all: Vec<usize> = f.concat();
        all.sort();
        assert_eq!(all, (0..21).collect::<Vec<_>>());
        assert_eq!(f, kfold_split(21, 10, 1).unwrap());
        assert!(kfold_split(5, 10, 1).is_err());
        assert!(kfold_split(5, 1, 1).is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(make_sizes(1000, 5, 200).unwrap(), [200, 400, 600, 800, 1000]);
        assert_eq!(make_sizes(50, 2, 7).unwrap(), [7, 50]);
        let s = make_sizes(19540, 100, 356).unwrap();
        assert_eq!(s.len(), 100);
        assert_eq!((s[0], s[99]), (356, 19540));
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert!(make_sizes(10, 20, 1).is_err());
        assert!(make_sizes(10, 1, 1).is_err());
        assert!(make_sizes(10, 3, 11).is_err());
    }

    #[test]
    fn uncertain_selection() {
        assert_eq!(select_uncertain_scores(&[2.0, -0.1, 0.3], 1).unwrap(), [1]);
        assert_eq!(select_uncertain_scores(&[0.5, -0.5], 1).unwrap(), [0]);
        assert_eq!(select_uncertain_scores(&[3.0, 1.0, 2.0], 3).unwrap(), [1, 2, 0]);
        assert!(select_uncertain_scores(&[1.0], 0).is_err());
        assert!(select_uncertain_scores(&[1.0], 2).is_err());
    }

    #[test]
    fn stopping_examples() {
        assert_eq!(stopping_check(&[0.98, 0.992, 0.991, 0.995], 0.99, 3), Some(3));
        assert_eq!(stopping_check(&[0.95; 6], 0.99, 3), None);
        assert_eq!(stopping_check(&[0.991, 0.991], 0.99, 3), None);
        assert_eq!(stopping_check(&[0.99], 0.99, 1), Some(0));
    }

    #[test]
    fn stopping_state_is_sticky() {
        let mut s = StoppingState::default();
        assert!(!s.push(0.991));
        assert!(!s.push(0.993));
        assert!(s.push(0.995));
        assert_eq!(s.fired_at, Some(2));
        assert!(!s.push(0.5));
        assert_eq!(s.fired_at, Some(2));
        assert_eq!(s.recent(), [0.993, 0.995, 0.5]);
    }

    #[test]
    fn schedule_defaults() {
        let s = CurveSchedule::new(1800, 100, None, Strategy::Active, 0).unwrap();
        assert_eq!(s.sizes[0], 18);
        assert_eq!(*s.sizes.last().unwrap(), 1800);
    }
}
