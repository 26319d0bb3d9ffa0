//! Classification metrics and inter-rater reliability.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::Label;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    /// Counts with "relevant" as the positive class.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut c = ConfusionCounts::default();
        for (gold, pred) in pairs {
            c.add(gold, pred);
        }
        c
    }

    pub fn add(&mut self, gold: Label, pred: Label) {
        match (gold.is_relevant(), pred.is_relevant()) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

impl std::ops::AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }
}

/// Precision, recall, F1, and accuracy. A ratio with a zero denominator is
/// reported as 0 and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
}

impl Prf {
    pub fn any_undefined(&self) -> bool {
        self.precision_undefined || self.recall_undefined
    }
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn prf(c: &ConfusionCounts) -> Result<Prf> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyEvaluation);
    }
    let (precision, precision_undefined) = ratio(c.tp, c.tp + c.fp);
    let (recall, recall_undefined) = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Prf {
        precision,
        recall,
        f1,
        accuracy: (c.tp + c.tn) as f64 / total as f64,
        precision_undefined,
        recall_undefined,
    })
}

fn check_pair<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("label sequence"));
    }
    Ok(())
}

pub fn percent_agreement<T: PartialEq>(a: &[T], b: &[T]) -> Result<f64> {
    check_pair(a, b)?;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(agree as f64 / a.len() as f64)
}

/// Cohen's kappa `(pₒ − pₑ) / (1 − pₑ)` with chance agreement from each
/// rater's marginals. Perfect observed agreement gives exactly 1.
pub fn cohen_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64> {
    check_pair(a, b)?;
    let n = a.len() as f64;
    let mut agree = 0usize;
    let mut marg: BTreeMap<&T, (usize, usize)> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        if x == y {
            agree += 1;
        }
        marg.entry(x).or_default().0 += 1;
        marg.entry(y).or_default().1 += 1;
    }
    if agree == a.len() {
        return Ok(1.0);
    }
    let po = agree as f64 / n;
    let pe: f64 = marg.values().map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n)).sum();
    Ok((po - pe) / (1.0 - pe))
}

/// Items × raters matrix of real-valued ratings, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    values: Vec<f64>,
    items: usize,
    raters: usize,
}

impl RatingsMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let items = rows.len();
        let raters = rows.first().map_or(0, Vec::len);
        if items < 2 || raters < 2 {
            return Err(Error::InvalidArgument(format!(
                "ICC needs at least 2 items and 2 raters, got {items}×{raters}"
            )));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != raters) {
            return Err(Error::InvalidArgument(format!(
                "row {r} has {} ratings, expected {raters}",
                rows[r].len()
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("ratings must be finite".into()));
        }
        Ok(RatingsMatrix {
            values: rows.iter().flatten().copied().collect(),
            items,
            raters,
        })
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn get(&self, item: usize, rater: usize) -> f64 {
        self.values[item * self.raters + rater]
    }
}

/// Two-way ANOVA mean squares for rows (items), columns (raters), and
/// residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnovaTable {
    pub msr: f64,
    pub msc: f64,
    pub mse: f64,
}

pub fn two_way_anova(m: &RatingsMatrix) -> AnovaTable {
    let (n, k) = (m.items, m.raters);
    let (nf, kf) = (n as f64, k as f64);
    let grand = m.values.iter().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = (0..n).map(|i| (0..k).map(|j| m.get(i, j)).sum::<f64>() / kf).collect();
    let col_means: Vec<f64> = (0..k).map(|j| (0..n).map(|i| m.get(i, j)).sum::<f64>() / nf).collect();
    let ssr = kf * row_means.iter().map(|r| (r - grand).powi(2)).sum::<f64>();
    let ssc = nf * col_means.iter().map(|c| (c - grand).powi(2)).sum::<f64>();
    let mut sse = 0.0;
    for (i, r) in row_means.iter().enumerate() {
        for (j, c) in col_means.iter().enumerate() {
            sse += (m.get(i, j) - r - c + grand).powi(2);
        }
    }
    AnovaTable {
        msr: ssr / (nf - 1.0),
        msc: ssc / (kf - 1.0),
        mse: sse / ((nf - 1.0) * (kf - 1.0)),
    }
}

pub const ICC_FORMULA: &str = "ICC = (MSR - MSE) / (MSR + (k-1)*MSE + (k/n)*(MSC - MSE))";

/// Single-rater, absolute-agreement ICC from a two-way ANOVA: see
/// [`ICC_FORMULA`].
pub fn icc_absolute(m: &RatingsMatrix) -> Result<f64> {
    let t = two_way_anova(m);
    let scale = m.values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    if t.msr <= 1e-24 * scale * scale {
        return Err(Error::UndefinedIcc("zero between-item variance"));
    }
    let (n, k) = (m.items as f64, m.raters as f64);
    let denom = t.msr + (k - 1.0) * t.mse + (k / n) * (t.msc - t.mse);
    Ok((t.msr - t.mse) / denom)
}

/// Lines of `metric TAB value`.
pub fn metric_lines<'a>(rows: impl IntoIterator<Item = (&'a str, f64)>) -> String {
    let mut s = String::new();
    for (name, v) in rows {
        let _ = writeln!(s, "{name}\t{v:.6}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn prf_hand_computed() {
        let c = ConfusionCounts {
            tp: 87,
            fp: 13,
            fn_: 12,
            tn: 88,
        };
        let m = prf(&c).unwrap();
        assert!(close(m.precision, 0.87, 1e-12));
        assert!(close(m.recall, 87.0 / 99.0, 1e-12));
        let f1 = 2.0 * 0.87 * (87.0 / 99.0) / (0.87 + 87.0 / 99.0);
        assert!(close(m.f1, f1, 1e-12));
        assert!(close(m.accuracy, 0.875, 1e-12));
        assert_eq!(
            format!("{:.3} {:.3} {:.3}", m.precision, m.recall, m.f1),
            "0.870 0.879 0.874"
        );
    }

    #[test]
    fn prf_perfect_and_degenerate() {
        let m = prf(&ConfusionCounts {
            tp: 5,
            fp: 0,
            fn_: 0,
            tn: 3,
        })
        .unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        let m = prf(&ConfusionCounts {
            tp: 0,
            fp: 4,
            fn_: 2,
            tn: 0,
        })
        .unwrap();
        assert_eq!(m.precision, 0.0);
        assert!(!m.precision_undefined);
        let m = prf(&ConfusionCounts {
            tp: 0,
            fp: 0,
            fn_: 0,
            tn: 7,
        })
        .unwrap();
        assert!(m.precision_undefined && m.recall_undefined);
        assert_eq!(m.f1, 0.0);
        assert!(matches!(prf(&ConfusionCounts::default()), Err(Error::EmptyEvaluation)));
    }

    #[test]
    fn kappa_fixtures() {
        assert_eq!(cohen_kappa(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&["x", "x"], &["x", "x"]).unwrap(), 1.0);
        let k = cohen_kappa(&[1, 1, 0, 0, 1, 0], &[1, 1, 0, 0, 0, 1]).unwrap();
        assert!(close(k, 1.0 / 3.0, 1e-12));
        // po = 0.5, pe = 0.5
        let k = cohen_kappa(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap();
        assert_eq!(k, 0.0);
    }

    #[test]
    fn kappa_errors() {
        assert!(matches!(cohen_kappa(&[1], &[1, 0]), Err(Error::LengthMismatch { .. })));
        assert!(cohen_kappa::<i32>(&[], &[]).is_err());
        assert!(percent_agreement(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn agreement_fixtures() {
        assert_eq!(percent_agreement(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(percent_agreement(&[1, 0], &[0, 1]).unwrap(), 0.0);
        let a: Vec<u8> = vec![1; 100];
        let b: Vec<u8> = (0..100).map(|i| u8::from(i < 87)).collect();
        assert!(close(percent_agreement(&a, &b).unwrap(), 0.87, 1e-12));
    }

    #[test]
    fn icc_fixtures() {
        let m = RatingsMatrix::new(&[vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0]]).unwrap();
        let t = two_way_anova(&m);
        assert!(close(t.msr, 2.0, 1e-12) && close(t.msc, 1.5, 1e-12) && close(t.mse, 0.0, 1e-12));
        assert!(close(icc_absolute(&m).unwrap(), 2.0 / 3.0, 1e-12));

        let same = RatingsMatrix::new(&[vec![1.0, 1.0], vec![4.0, 4.0], vec![2.0, 2.0]]).unwrap();
        assert!(close(icc_absolute(&same).unwrap(), 1.0, 1e-12));

        let swapped = RatingsMatrix::new(&[vec![2.0, 1.0], vec![3.0, 2.0], vec![4.0, 3.0]]).unwrap();
        assert!(close(icc_absolute(&swapped).unwrap(), 2.0 / 3.0, 1e-12));
    }

    #[test]
    fn icc_errors() {
        let flat = RatingsMatrix::new(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert!(matches!(icc_absolute(&flat), Err(Error::UndefinedIcc(_))));
        assert!(RatingsMatrix::new(&[vec![1.0, 2.0]]).is_err());
        assert!(RatingsMatrix::new(&[vec![1.0], vec![2.0]]).is_err());
        assert!(RatingsMatrix::new(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn metric_line_format() {
        assert_eq!(
            metric_lines([("f1", 0.5), ("kappa", 1.0 / 3.0)]),
            "f1\t0.500000\nkappa\t0.333333\n"
        );
    }
}
