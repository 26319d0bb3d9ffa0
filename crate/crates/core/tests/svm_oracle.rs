mod common;

use common::{dataset, dense, oracle};
use unrest_filter::svm::{self, SparseVector, TrainConfig};
use unrest_filter::Label;

#[test]
fn matches_oracle_objective() {
    for seed in 0..20 {
        let ex = dataset(seed);
        let (m, rep) = svm::train_with_report(&ex, 20, &TrainConfig::default()).unwrap();
        let (rows, ys) = dense(&ex);
        let o = oracle::solve(&rows, &ys, rep.c, 1e-6);
        let p = svm::objective(&m, &ex, rep.c);
        let rel = (p - o.primal) / o.primal;
        assert!(
            rel.abs() <= 1e-4 && o.primal - o.dual <= 1e-6,
            "seed {seed}: rel {rel:e}"
        );
    }
}

#[test]
fn tight_tolerance_reaches_oracle_at_any_c() {
    for (seed, c) in [(40, 0.01), (41, 1.0), (42, 10.0), (43, 100.0)] {
        let ex = dataset(seed);
        let cfg = TrainConfig {
            c: Some(c),
            tolerance: 1e-7,
            ..TrainConfig::default()
        };
        let m = svm::train(&ex, 20, &cfg).unwrap();
        let (rows, ys) = dense(&ex);
        let o = oracle::solve(&rows, &ys, c, 1e-6);
        let rel = (svm::objective(&m, &ex, c) - o.primal) / o.primal;
        assert!(rel.abs() <= 1e-6, "C={c}: rel {rel:e}");
    }
}

#[test]
fn analytic_one_dimensional_case() {
    // x = +1 labeled relevant, x = −1 labeled irrelevant.
    let ex = vec![
        (SparseVector::new(vec![(1, 1.0)]), Label::Relevant),
        (SparseVector::new(vec![(1, -1.0)]), Label::Irrelevant),
    ];
    let cfg = TrainConfig {
        c: Some(100.0),
        ..TrainConfig::default()
    };
    let m = svm::train(&ex, 1, &cfg).unwrap();
    assert!((m.weight(1).unwrap() - 1.0).abs() <= 1e-3);
    assert!(m.bias().abs() <= 1e-3);
}

#[test]
fn dual_objective_never_increases() {
    for seed in 0..5 {
        let (_, rep) = svm::train_with_report(&dataset(seed), 20, &TrainConfig::default()).unwrap();
        assert!(rep.dual_history.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(rep.gap >= -1e-9);
    }
}

fn max_diff(a: &svm::LinearModel, b: &svm::LinearModel) -> f64 {
    a.weights()
        .iter()
        .zip(b.weights())
        .map(|(x, y)| (x - y).abs())
        .fold((a.bias() - b.bias()).abs(), f64::max)
}

#[test]
fn duplicated_examples_match_halved_c() {
    for seed in 60..65 {
        let ex = dataset(seed);
        let twice: Vec<_> = ex.iter().chain(&ex).cloned().collect();
        let cfg = |c| TrainConfig {
            c: Some(c),
            tolerance: 1e-8,
            ..TrainConfig::default()
        };
        let a = svm::train(&ex, 20, &cfg(0.5)).unwrap();
        let b = svm::train(&twice, 20, &cfg(0.25)).unwrap();
        assert!(max_diff(&a, &b) < 1e-5, "seed {seed}: {}", max_diff(&a, &b));
    }
}

#[test]
fn predictions_agree_with_oracle() {
    for seed in 70..80 {
        let ex = dataset(seed);
        let (m, rep) = svm::train_with_report(&ex, 20, &TrainConfig::default()).unwrap();
        let (rows, ys) = dense(&ex);
        let o = oracle::solve(&rows, &ys, rep.c, 1e-6);
        for (i, (x, _)) in ex.iter().enumerate() {
            let s = rows[i].iter().zip(&o.weights).map(|(a, b)| a * b).sum::<f64>() + o.bias;
            // Near the boundary the two solutions may legitimately disagree.
            if s.abs() > 0.05 {
                assert_eq!(m.classify(x).unwrap(), svm::label_for_score(s), "seed {seed} row {i}");
            }
        }
    }
}

#[test]
fn flipped_labels_negate_model() {
    for seed in 80..85 {
        let ex = dataset(seed);
        let flipped: Vec<_> = ex
            .iter()
            .map(|(x, y)| {
                (
                    x.clone(),
                    if *y == Label::Relevant {
                        Label::Irrelevant
                    } else {
                        Label::Relevant
                    },
                )
            })
            .collect();
        let cfg = TrainConfig {
            tolerance: 1e-8,
            ..TrainConfig::default()
        };
        let a = svm::train(&ex, 20, &cfg).unwrap();
        let b = svm::train(&flipped, 20, &cfg).unwrap();
        let neg = svm::LinearModel::new(b.weights().iter().map(|w| -w).collect(), -b.bias());
        assert!(max_diff(&a, &neg) < 1e-5, "seed {seed}");
    }
}
