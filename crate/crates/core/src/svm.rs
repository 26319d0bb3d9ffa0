//! Linear soft-margin classifier with hinge loss.
//!
//! Training minimizes `½‖w̃‖² + C·Σ max(0, 1 − yᵢ·w̃·x̃ᵢ)` where `x̃ = [x; 1]`
//! and `w̃ = [w; b]`: the bias is the weight of a constant feature and is
//! regularized with the rest. The solver is dual coordinate descent on the
//! box-constrained dual `min ½αᵀQα − Σα, 0 ≤ α ≤ C`.
//!
//! Scores are raw decision values `w·x + b`, not geometric distances. For a
//! fixed model the two differ by the constant factor `‖w‖`, so every ranking
//! and sign is the same.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::ingest::Label;
use crate::rng;

/// A sparse input row with 1-based feature indices.
pub trait Features {
    fn for_each_nonzero(&self, f: impl FnMut(u32, f64));

    fn max_index(&self) -> Option<u32>;

    fn norm_sq(&self) -> f64 {
        let mut s = 0.0;
        self.for_each_nonzero(|_, v| s += v * v);
        s
    }
}

impl Features for FeatureVector {
    fn for_each_nonzero(&self, mut f: impl FnMut(u32, f64)) {
        for &i in self.indices() {
            f(i, 1.0);
        }
    }

    fn max_index(&self) -> Option<u32> {
        self.indices().last().copied()
    }

    fn norm_sq(&self) -> f64 {
        self.len() as f64
    }
}

impl<T: Features + ?Sized> Features for &T {
    fn for_each_nonzero(&self, f: impl FnMut(u32, f64)) {
        (**self).for_each_nonzero(f)
    }

    fn max_index(&self) -> Option<u32> {
        (**self).max_index()
    }

    fn norm_sq(&self) -> f64 {
        (**self).norm_sq()
    }
}

/// Real-valued sparse row, sorted by index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Sorts by index and sums repeated indices; zero values are dropped.
    pub fn new(mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        SparseVector { entries: merged }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }
}

impl Features for SparseVector {
    fn for_each_nonzero(&self, mut f: impl FnMut(u32, f64)) {
        for &(i, v) in &self.entries {
            f(i, v);
        }
    }

    fn max_index(&self) -> Option<u32> {
        self.entries.last().map(|e| e.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Regularization trade-off. `None` selects `1 / mean(‖x‖²)` over the
    /// training set.
    pub c: Option<f64>,
    /// Bound on the spread of projected gradients (maximum KKT violation)
    /// at which training stops.
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: None,
            tolerance: 1e-3,
            max_epochs: 1000,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("C must be positive, got {c}")));
            }
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Config(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
    bias: f64,
}

/// Diagnostics from one training run.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub c: f64,
    pub epochs: usize,
    pub converged: bool,
    /// Projected-gradient spread in the final epoch.
    pub violation: f64,
    /// Dual objective (minimization form) after each epoch.
    pub dual_history: Vec<f64>,
    pub primal: f64,
    /// Duality gap `primal − (−dual)`; nonnegative up to rounding.
    pub gap: f64,
}

/// Maps a score to a label. A score of exactly zero is relevant.
pub fn label_for_score(score: f64) -> Label {
    if score >= 0.0 {
        Label::Relevant
    } else {
        Label::Irrelevant
    }
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Self {
        LinearModel { weights, bias }
    }

    pub fn zero(vocab_size: u32) -> Self {
        LinearModel::new(vec![0.0; vocab_size as usize], 0.0)
    }

    pub fn vocab_size(&self) -> u32 {
        self.weights.len() as u32
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    /// Weight of a 1-based feature index.
    pub fn weight(&self, index: u32) -> Option<f64> {
        (index as usize)
            .checked_sub(1)
            .and_then(|i| self.weights.get(i))
            .copied()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Squared norm of the augmented weight vector `[w; b]`.
    pub fn norm_sq(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>() + self.bias * self.bias
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }

    /// `w·x + b`.
    pub fn score<X: Features + ?Sized>(&self, x: &X) -> Result<f64> {
        if let Some(i) = x.max_index() {
            if i as usize > self.weights.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    vocab_size: self.vocab_size(),
                });
            }
        }
        let mut s = self.bias;
        x.for_each_nonzero(|i, v| s += self.weights[i as usize - 1] * v);
        Ok(s)
    }

    pub fn classify<X: Features + ?Sized>(&self, x: &X) -> Result<Label> {
        self.score(x).map(label_for_score)
    }

    /// `bias <real>` followed by `index TAB weight` for every nonzero
    /// weight, indices ascending. A leading `# vocab_size N` comment records
    /// the dimension.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# vocab_size {}", self.vocab_size());
        let _ = writeln!(s, "bias {:e}", self.bias);
        for (i, w) in self.weights.iter().enumerate() {
            if *w != 0.0 {
                let _ = writeln!(s, "{}\t{:e}", i + 1, w);
            }
        }
        s
    }

    /// Parses [`LinearModel::to_text`]. Without a `vocab_size` comment the
    /// dimension is `vocab_size` if given, else the largest index.
    pub fn from_text(text: &str, vocab_size: Option<u32>) -> Result<Self> {
        let mut declared = None;
        let mut bias = None;
        let mut pairs: Vec<(u32, f64)> = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(n) = rest.trim().strip_prefix("vocab_size") {
                    declared = Some(
                        n.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::ModelFormat(format!("bad vocab_size comment {line:?}")))?,
                    );
                }
                continue;
            }
            if let Some(b) = line.strip_prefix("bias") {
                bias = Some(parse_real(b.trim())?);
                continue;
            }
            if bias.is_none() {
                return Err(Error::ModelFormat("missing `bias` header".into()));
            }
            let (i, w) = line
                .split_once('\t')
                .ok_or_else(|| Error::ModelFormat(format!("bad weight line {line:?}")))?;
            let i: u32 = i
                .parse()
                .map_err(|_| Error::ModelFormat(format!("bad index in {line:?}")))?;
            if i == 0 || pairs.last().is_some_and(|(p, _)| *p >= i) {
                return Err(Error::ModelFormat(format!(
                    "indices must be ascending from 1 (line {line:?})"
                )));
            }
            pairs.push((i, parse_real(w)?));
        }
        let bias = bias.ok_or_else(|| Error::ModelFormat("missing `bias` header".into()))?;
        let max_idx = pairs.last().map_or(0, |(i, _)| *i);
        let dim = declared.or(vocab_size).unwrap_or(max_idx);
        if max_idx > dim {
            return Err(Error::ModelFormat(format!(
                "weight index {max_idx} exceeds vocabulary size {dim}"
            )));
        }
        let mut weights = vec![0.0; dim as usize];
        for (i, w) in pairs {
            weights[i as usize - 1] = w;
        }
        let model = LinearModel::new(weights, bias);
        if !model.is_finite() {
            return Err(Error::ModelFormat("non-finite weight".into()));
        }
        Ok(model)
    }
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::ModelFormat(format!("bad real {s:?}")))
}

/// `1 / mean(‖x‖²)` over the examples (the bias feature excluded), or 1 when
/// every vector is empty.
pub fn default_c<X: Features>(examples: &[(X, Label)]) -> f64 {
    if examples.is_empty() {
        return 1.0;
    }
    let total: f64 = examples.iter().map(|(x, _)| x.norm_sq()).sum();
    let mean = total / examples.len() as f64;
    if mean > 0.0 {
        1.0 / mean
    } else {
        1.0
    }
}

/// Sum of hinge losses `Σ max(0, 1 − y·score)`.
pub fn hinge_loss<X: Features>(model: &LinearModel, examples: &[(X, Label)]) -> f64 {
    examples
        .iter()
        .map(|(x, y)| {
            let s = model.score(x).unwrap_or(f64::NAN);
            (1.0 - y.sign() * s).max(0.0)
        })
        .sum()
}

/// Primal objective `½‖[w; b]‖² + C·Σ hinge`.
pub fn objective<X: Features>(model: &LinearModel, examples: &[(X, Label)], c: f64) -> f64 {
    0.5 * model.norm_sq() + c * hinge_loss(model, examples)
}

pub fn train<X: Features>(examples: &[(X, Label)], vocab_size: u32, cfg: &TrainConfig) -> Result<LinearModel> {
    train_with_report(examples, vocab_size, cfg).map(|(m, _)| m)
}

pub fn train_with_report<X: Features>(
    examples: &[(X, Label)],
    vocab_size: u32,
    cfg: &TrainConfig,
) -> Result<(LinearModel, TrainReport)> {
    cfg.validate()?;
    let n_pos = examples.iter().filter(|(_, y)| y.is_relevant()).count();
    if n_pos == 0 || n_pos == examples.len() {
        return Err(Error::DegenerateTrainingSet(format!(
            "{} examples, {} relevant; both classes are required",
            examples.len(),
            n_pos
        )));
    }
    for (x, _) in examples {
        if let Some(i) = x.max_index() {
            if i > vocab_size || i == 0 {
                return Err(Error::IndexOutOfRange { index: i, vocab_size });
            }
        }
    }

    let c = cfg.c.unwrap_or_else(|| default_c(examples));
    if cfg.c.is_none() {
        log::info!(
            "C = {c:.6} (inverse mean squared norm over {} examples)",
            examples.len()
        );
    }

    let n = examples.len();
    // Flattened rows: row i is entries[offsets[i]..offsets[i + 1]], with
    // 0-based feature positions.
    let mut offsets = Vec::with_capacity(n + 1);
    let mut entries: Vec<(usize, f64)> = Vec::new();
    offsets.push(0);
    for (x, _) in examples {
        x.for_each_nonzero(|i, v| entries.push((i as usize - 1, v)));
        offsets.push(entries.len());
    }
    let row = |i: usize| &entries[offsets[i]..offsets[i + 1]];
    let ys: Vec<f64> = examples.iter().map(|(_, y)| y.sign()).collect();
    let qd: Vec<f64> = (0..n)
        .map(|i| row(i).iter().map(|(_, v)| v * v).sum::<f64>() + 1.0)
        .collect();

    let mut w = vec![0.0; vocab_size as usize];
    let mut b = 0.0;
    let mut alpha = vec![0.0; n];
    let mut alpha_sum = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng::from_seed(cfg.seed);

    let mut dual_history = Vec::new();
    let mut converged = false;
    let mut violation = f64::INFINITY;
    let mut epochs = 0;

    while epochs < cfg.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;

        for &i in &order {
            let x = row(i);
            let margin = b + x.iter().map(|&(j, v)| w[j] * v).sum::<f64>();
            let g = ys[i] * margin - 1.0;
            let a = alpha[i];
            let pg = if a <= 0.0 {
                g.min(0.0)
            } else if a >= c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let next = (a - g / qd[i]).clamp(0.0, c);
                let step = (next - a) * ys[i];
                if step != 0.0 {
                    alpha[i] = next;
                    alpha_sum += next - a;
                    for &(j, v) in x {
                        w[j] += step * v;
                    }
                    b += step;
                }
            }
        }

        let norm_sq = w.iter().map(|v| v * v).sum::<f64>() + b * b;
        let dual = 0.5 * norm_sq - alpha_sum;
        if !dual.is_finite() {
            return Err(Error::NonFinite(format!(
                "dual objective {dual} after epoch {epochs} (C = {c})"
            )));
        }
        dual_history.push(dual);
        violation = pg_max - pg_min;
        if violation <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "training stopped at the epoch cap ({}) with violation {violation:.3e}",
            cfg.max_epochs
        );
    }

    let model = LinearModel::new(w, b);
    if !model.is_finite() {
        return Err(Error::NonFinite("non-finite weights after training".into()));
    }
    let primal = objective(&model, examples, c);
    let dual = *dual_history.last().unwrap_or(&0.0);
    let report = TrainReport {
        c,
        epochs,
        converged,
        violation,
        dual_history,
        primal,
        gap: primal + dual,
    };
    Ok((model, report))
}
