//! Confidence analysis of classifier scores: threshold sweeps over `|score|`
//! and a logistic regression of per-item correctness on `|score|`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::metrics::{prf, ConfusionCounts, Prf};
use crate::svm::label_for_score;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoredItem {
    pub score: f64,
    pub gold: Label,
}

impl ScoredItem {
    pub fn new(score: f64, gold: Label) -> Self {
        ScoredItem { score, gold }
    }

    pub fn predicted(&self) -> Label {
        label_for_score(self.score)
    }

    pub fn correct(&self) -> bool {
        self.predicted() == self.gold
    }
}

/// Metrics over the items with `|score| ≥ threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub threshold: f64,
    pub retained: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Retained true positives over all gold positives, discarded included.
    pub global_recall: f64,
    /// No items retained, or a precision/recall denominator was zero.
    pub undefined: bool,
}

/// Thresholds from 0 to 2: steps of 0.1 up to 1, then 1.25, 1.5, 2.
pub fn default_grid() -> Vec<f64> {
    vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.25, 1.5, 2.0]
}

/// Parses `default` or a comma-separated list of thresholds.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    if spec.trim() == "default" {
        return Ok(default_grid());
    }
    let grid = spec
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad threshold {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    check_grid(&grid)?;
    Ok(grid)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("thresholds must be finite and ≥ 0".into()));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("threshold grid must be ascending".into()));
    }
    Ok(())
}

pub fn sweep_thresholds(items: &[ScoredItem], grid: &[f64]) -> Result<Vec<SweepRow>> {
    check_grid(grid)?;
    let gold_pos = items.iter().filter(|i| i.gold.is_relevant()).count();
    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut counts = ConfusionCounts::default();
        for it in items.iter().filter(|i| i.score.abs() >= t) {
            counts.add(it.gold, it.predicted());
        }
        let retained = counts.total();
        let global_recall = if gold_pos == 0 {
            0.0
        } else {
            counts.tp as f64 / gold_pos as f64
        };
        let row = match prf(&counts) {
            Ok(m) => row_from(t, retained, &m, global_recall),
            Err(_) => SweepRow {
                threshold: t,
                retained: 0,
                precision: 0.0,
                recall: 0.0,
                f1: 0.0,
                accuracy: 0.0,
                global_recall,
                undefined: true,
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

fn row_from(threshold: f64, retained: usize, m: &Prf, global_recall: f64) -> SweepRow {
    SweepRow {
        threshold,
        retained,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        accuracy: m.accuracy,
        global_recall,
        undefined: m.any_undefined(),
    }
}

/// `threshold TAB retained TAB precision TAB recall TAB f1 TAB accuracy`,
/// with `global_recall` as a seventh column.
pub fn sweep_lines(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
            r.threshold, r.retained, r.precision, r.recall, r.f1, r.accuracy, r.global_recall
        );
    }
    s
}

/// Standard normal CDF via the complementary error function.
///
/// `libm::erfc` is a port of the FreeBSD msun routine (rational
/// approximations, error below 1 ulp), so the absolute error here is far
/// below 1e-12 and the upper tail keeps full relative precision.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Two-sided upper-tail probability `2·(1 − Φ(|z|))`, computed without
/// cancellation.
pub fn normal_two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaldTest {
    pub z: f64,
    pub p: f64,
}

pub fn wald_test(estimate: f64, se: f64) -> Result<WaldTest> {
    if se.is_nan() || se <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "standard error must be positive, got {se}"
        )));
    }
    let z = estimate / se;
    Ok(WaldTest {
        z,
        p: normal_two_sided_p(z),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Separation {
    /// All responses identical.
    Constant,
    /// A cut on x splits the responses perfectly.
    Complete,
    /// Perfect split except for ties at the cut point.
    QuasiComplete,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogisticFit {
    pub intercept: f64,
    pub slope: f64,
    pub se_intercept: f64,
    pub se_slope: f64,
    pub converged: bool,
    pub iterations: usize,
    pub separation: Option<Separation>,
    /// A small ridge was added because the information matrix was singular.
    pub ridge: bool,
    pub log_likelihood: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct LogisticOptions {
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        LogisticOptions {
            max_iter: 100,
            tolerance: 1e-10,
        }
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn log_likelihood(xs: &[f64], ys: &[bool], a: f64, b: f64) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let eta = a + b * x;
            // log σ(η) = −log(1 + e^{−η}); log(1 − σ(η)) = −log(1 + e^{η})
            if y {
                -softplus(-eta)
            } else {
                -softplus(eta)
            }
        })
        .sum()
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn detect_separation(xs: &[f64], ys: &[bool]) -> Option<Separation> {
    let ones = ys.iter().filter(|&&y| y).count();
    if ones == 0 || ones == ys.len() {
        return Some(Separation::Constant);
    }
    let range = |want: bool| {
        xs.iter()
            .zip(ys)
            .filter(|(_, &y)| y == want)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&x, _)| {
                (lo.min(x), hi.max(x))
            })
    };
    let (lo1, hi1) = range(true);
    let (lo0, hi0) = range(false);
    if hi0 < lo1 || hi1 < lo0 {
        Some(Separation::Complete)
    } else if hi0 == lo1 || hi1 == lo0 {
        Some(Separation::QuasiComplete)
    } else {
        None
    }
}

/// Maximum-likelihood fit of `P(y = 1) = σ(a + b·x)` by iteratively
/// reweighted least squares with step halving. Standard errors come from
/// the inverse information matrix at the estimate.
///
/// Separated data has no finite estimate: the fit reports
/// `converged = false` with the kind of separation and leaves the estimates
/// at their last iterate (zero for constant responses).
pub fn fit_logistic(xs: &[f64], ys: &[bool]) -> Result<LogisticFit> {
    fit_logistic_with(xs, ys, LogisticOptions::default())
}

pub fn fit_logistic_with(xs: &[f64], ys: &[bool], opts: LogisticOptions) -> Result<LogisticFit> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("logistic fit needs at least 2 points".into()));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("predictor values must be finite".into()));
    }
    let n = xs.len();
    let separation = detect_separation(xs, ys);
    if separation == Some(Separation::Constant) {
        return Ok(LogisticFit {
            intercept: 0.0,
            slope: 0.0,
            se_intercept: f64::INFINITY,
            se_slope: f64::INFINITY,
            converged: false,
            iterations: 0,
            separation,
            ridge: false,
            log_likelihood: log_likelihood(xs, ys, 0.0, 0.0),
            n,
        });
    }

    let (mut a, mut b) = (0.0, 0.0);
    let mut ll = log_likelihood(xs, ys, a, b);
    let mut ridge = false;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let (g, mut info) = gradient_and_information(xs, ys, a, b);
        if singular(&info) {
            ridge = true;
            let boost = 1e-8 * (info[0][0] + info[1][1]).max(1e-12);
            info[0][0] += boost;
            info[1][1] += boost;
        }
        let Some(step) = solve2(&info, g) else {
            break;
        };
        let mut t = 1.0;
        let mut next = (a + step[0], b + step[1]);
        let mut next_ll = log_likelihood(xs, ys, next.0, next.1);
        while next_ll < ll - 1e-12 * ll.abs().max(1.0) && t > 1e-10 {
            t *= 0.5;
            next = (a + t * step[0], b + t * step[1]);
            next_ll = log_likelihood(xs, ys, next.0, next.1);
        }
        let delta = (t * step[0]).abs().max((t * step[1]).abs());
        (a, b) = next;
        ll = next_ll;
        if delta <= opts.tolerance * (1.0 + a.abs().max(b.abs())) {
            converged = true;
            break;
        }
    }

    if separation.is_some() {
        converged = false;
    }
    let (_, info) = gradient_and_information(xs, ys, a, b);
    let (se_intercept, se_slope) = match invert2(&info) {
        Some(inv) if inv[0][0] > 0.0 && inv[1][1] > 0.0 => (inv[0][0].sqrt(), inv[1][1].sqrt()),
        _ => (f64::INFINITY, f64::INFINITY),
    };
    if !(a.is_finite() && b.is_finite()) {
        converged = false;
    }
    Ok(LogisticFit {
        intercept: a,
        slope: b,
        se_intercept,
        se_slope,
        converged,
        iterations,
        separation,
        ridge,
        log_likelihood: ll,
        n,
    })
}

type Mat2 = [[f64; 2]; 2];

fn gradient_and_information(xs: &[f64], ys: &[bool], a: f64, b: f64) -> ([f64; 2], Mat2) {
    let mut g = [0.0; 2];
    let mut h = [[0.0; 2]; 2];
    for (&x, &y) in xs.iter().zip(ys) {
        let p = sigmoid(a + b * x);
        let r = f64::from(u8::from(y)) - p;
        let w = p * (1.0 - p);
        g[0] += r;
        g[1] += r * x;
        h[0][0] += w;
        h[0][1] += w * x;
        h[1][1] += w * x * x;
    }
    h[1][0] = h[0][1];
    (g, h)
}

fn det2(m: &Mat2) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn singular(m: &Mat2) -> bool {
    let scale = m[0][0].abs().max(m[1][1].abs());
    scale == 0.0 || det2(m).abs() <= 1e-12 * scale * scale
}

fn invert2(m: &Mat2) -> Option<Mat2> {
    let d = det2(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    Some([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
}

fn solve2(m: &Mat2, v: [f64; 2]) -> Option<[f64; 2]> {
    let inv = invert2(m)?;
    Some([inv[0][0] * v[0] + inv[0][1] * v[1], inv[1][0] * v[0] + inv[1][1] * v[1]])
}

/// Correctness-on-`|score|` regressions over all items and over the
/// negative- and positive-score subsets.
#[derive(Debug, Clone, Serialize)]
pub struct RegressionReport {
    pub all: LogisticFit,
    pub negative: Option<LogisticFit>,
    pub positive: Option<LogisticFit>,
}

pub fn regress_accuracy(items: &[ScoredItem]) -> Result<RegressionReport> {
    let fit = |subset: Vec<&ScoredItem>| {
        let xs: Vec<f64> = subset.iter().map(|i| i.score.abs()).collect();
        let ys: Vec<bool> = subset.iter().map(|i| i.correct()).collect();
        fit_logistic(&xs, &ys)
    };
    let all = fit(items.iter().collect())?;
    let neg: Vec<&ScoredItem> = items.iter().filter(|i| i.score < 0.0).collect();
    let pos: Vec<&ScoredItem> = items.iter().filter(|i| i.score >= 0.0).collect();
    let negative = if neg.len() >= 2 { Some(fit(neg)?) } else { None };
    let positive = if pos.len() >= 2 { Some(fit(pos)?) } else { None };
    Ok(RegressionReport {
        all,
        negative,
        positive,
    })
}

/// Coefficient table: estimate, SE, z, and p per coefficient.
pub fn coefficient_table(name: &str, fit: &LogisticFit) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# {name}: n={} converged={} iterations={} separation={} ridge={} loglik={:.6}",
        fit.n,
        fit.converged,
        fit.iterations,
        fit.separation.map_or("none".to_string(), |k| format!("{k:?}")),
        fit.ridge,
        fit.log_likelihood
    );
    let _ = writeln!(s, "coefficient\testimate\tse\tz\tp");
    for (coef, est, se) in [
        ("intercept", fit.intercept, fit.se_intercept),
        ("abs_score", fit.slope, fit.se_slope),
    ] {
        match wald_test(est, se) {
            Ok(w) if se.is_finite() => {
                let _ = writeln!(s, "{coef}\t{est:.6}\t{se:.6}\t{:.4}\t{:.3e}", w.z, w.p);
            }
            _ => {
                let _ = writeln!(s, "{coef}\t{est:.6}\tNA\tNA\tNA");
            }
        }
    }
    s
}

pub fn regression_text(r: &RegressionReport) -> String {
    let mut s = coefficient_table("all", &r.all);
    for (name, fit) in [("negative", &r.negative), ("positive", &r.positive)] {
        s.push('\n');
        match fit {
            Some(f) => s.push_str(&coefficient_table(name, f)),
            None => {
                let _ = writeln!(s, "# {name}: fewer than 2 items");
            }
        }
    }
    s
}
