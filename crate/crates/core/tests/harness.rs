mod common;

use std::collections::BTreeSet;

use unrest_filter::features::FeatureConfig;
use unrest_filter::harness::*;
use unrest_filter::rng;
use unrest_filter::svm::TrainConfig;
use unrest_filter::AnalyzedTweet;

fn curve(pool: &[AnalyzedTweet], test: &[AnalyzedTweet], strategy: Strategy, seed: u64) -> Curve {
    let cfg = CurveConfig {
        schedule: CurveSchedule::new(pool.len(), 12, None, strategy, seed).unwrap(),
        train: TrainConfig::default(),
        features: FeatureConfig::preset("lex1").unwrap(),
        stop: StopParams::default(),
        fold: 0,
    };
    run_curve(pool, test, None, &cfg).unwrap()
}

fn setup(seed: u64) -> (Vec<AnalyzedTweet>, Vec<AnalyzedTweet>) {
    let corpus = common::synth(400, seed);
    let folds = kfold_split(corpus.len(), 5, seed).unwrap();
    fold_partition(&corpus, &folds, 0)
}

fn members(c: &Curve, upto: usize) -> Vec<usize> {
    let mut m: Vec<usize> = c.points[..=upto].iter().flat_map(|p| p.added.clone()).collect();
    m.sort_unstable();
    m
}

#[test]
fn training_sets_are_nested_and_sized() {
    let (pool, test) = setup(1);
    for strategy in [Strategy::Random, Strategy::Active] {
        let c = curve(&pool, &test, strategy, 9);
        let mut seen = BTreeSet::new();
        for p in &c.points {
            for &i in &p.added {
                assert!(seen.insert(i), "{strategy}: item {i} added twice");
            }
            assert_eq!(seen.len(), p.size);
        }
        assert_eq!(seen.len(), pool.len());
    }
}

#[test]
fn strategies_share_first_and_last_points() {
    let (pool, test) = setup(2);
    let r = curve(&pool, &test, Strategy::Random, 4);
    let a = curve(&pool, &test, Strategy::Active, 4);
    assert_eq!(r.points[0], a.points[0]);
    let (lr, la) = (r.points.last().unwrap(), a.points.last().unwrap());
    assert_eq!(lr.size, pool.len());
    assert_eq!(
        (lr.precision, lr.recall, lr.f1, lr.accuracy),
        (la.precision, la.recall, la.f1, la.accuracy)
    );
}

#[test]
fn membership_reproduces_metrics() {
    let (pool, test) = setup(3);
    let seed = 21;
    let train = TrainConfig {
        seed: rng::derive(seed, 2),
        ..TrainConfig::default()
    };
    let features = FeatureConfig::preset("lex1").unwrap();
    for strategy in [Strategy::Random, Strategy::Active] {
        let c = curve(&pool, &test, strategy, seed);
        let lines = membership_lines(std::slice::from_ref(&c), |_, i| pool[i].id().to_string());
        let mut ids: Vec<&str> = Vec::new();
        for (line, p) in lines.lines().zip(&c.points) {
            ids.extend(line.split('\t').skip(3));
            let set: Vec<&AnalyzedTweet> = pool.iter().filter(|t| ids.contains(&t.id())).collect();
            assert_eq!(set.len(), p.size);
            let model = train_on(&set, &features, &train).unwrap();
            let (m, _) = evaluate(&model, &test).unwrap();
            assert_eq!(
                (m.precision, m.recall, m.f1, m.accuracy),
                (p.precision, p.recall, p.f1, p.accuracy)
            );
        }
    }
}

#[test]
fn active_adds_least_certain_items() {
    let (pool, test) = setup(4);
    let seed = 8;
    let c = curve(&pool, &test, Strategy::Active, seed);
    let train = TrainConfig {
        seed: rng::derive(seed, 2),
        ..TrainConfig::default()
    };
    let features = FeatureConfig::preset("lex1").unwrap();
    for j in 1..c.points.len() {
        let before = members(&c, j - 1);
        let set: Vec<&AnalyzedTweet> = before.iter().map(|&i| &pool[i]).collect();
        let model = train_on(&set, &features, &train).unwrap();
        let rest: Vec<usize> = (0..pool.len()).filter(|i| before.binary_search(i).is_err()).collect();
        let mut by_margin = rest.clone();
        by_margin.sort_by(|&x, &y| {
            model
                .score(&pool[x])
                .abs()
                .total_cmp(&model.score(&pool[y]).abs())
                .then(x.cmp(&y))
        });
        let mut expect = by_margin[..c.points[j].added.len()].to_vec();
        expect.sort_unstable();
        assert_eq!(c.points[j].added, expect, "point {j}");
    }
}

#[test]
fn random_prefix_is_seeded() {
    let (pool, test) = setup(5);
    let a = curve(&pool, &test, Strategy::Random, 1);
    let b = curve(&pool, &test, Strategy::Random, 1);
    let c = curve(&pool, &test, Strategy::Random, 2);
    assert_eq!(a.points, b.points);
    assert_ne!(a.points[0].added, c.points[0].added);
}

#[test]
fn kappa_and_stop_flags_agree() {
    let (pool, test) = setup(6);
    let c = curve(&pool, &test, Strategy::Active, 3);
    assert!(c.points[0].kappa_vs_prev.is_none());
    let history: Vec<f64> = c.points[1..].iter().map(|p| p.kappa_vs_prev.unwrap()).collect();
    assert_eq!(c.stopping.history, history);
    let fired = stopping_check(&history, 0.99, 3);
    assert_eq!(c.stop_point(), fired.map(|s| s + 1));
    assert_eq!(
        c.points.iter().filter(|p| p.stop_here).count(),
        usize::from(fired.is_some())
    );
}

#[test]
fn cross_validation_is_thread_count_independent() {
    let corpus = common::synth(300, 7);
    let f = FeatureConfig::preset("lex1").unwrap();
    let t = TrainConfig::default();
    let one = with_jobs(Some(1), || cross_validate(&corpus, 5, 3, &f, &t))
        .unwrap()
        .unwrap();
    let four = with_jobs(Some(4), || cross_validate(&corpus, 5, 3, &f, &t))
        .unwrap()
        .unwrap();
    assert_eq!(cv_report(&one), cv_report(&four));
    let s1 = with_jobs(Some(1), || out_of_fold_scores(&corpus, 5, 3, &f, &t))
        .unwrap()
        .unwrap();
    let s4 = with_jobs(Some(4), || out_of_fold_scores(&corpus, 5, 3, &f, &t))
        .unwrap()
        .unwrap();
    assert_eq!(s1, s4);
    assert_eq!(one.iter().map(|r| r.test_size).sum::<usize>(), 300);
}
