#![allow(dead_code)]

pub mod durability;
pub mod http;
pub mod oracle;

use std::path::Path;

use rand::Rng;
use unrest_filter::features::FeatureVector;
use unrest_filter::rng;

use unrest_filter::ingest::write_records;
use unrest_filter::synth::{generate, SynthConfig};
use unrest_filter::{AnalyzedTweet, Label};

pub fn synth(size: usize, seed: u64) -> Vec<AnalyzedTweet> {
    generate(&SynthConfig {
        size,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
}

pub fn write_corpus(path: &Path, corpus: &[AnalyzedTweet]) {
    let mut buf = Vec::new();
    write_records(&mut buf, corpus).unwrap();
    std::fs::write(path, buf).unwrap();
}

/// The corpus with gold labels removed.
pub fn unlabeled(corpus: &[AnalyzedTweet]) -> Vec<AnalyzedTweet> {
    corpus
        .iter()
        .cloned()
        .map(|mut t| {
            t.tweet.label = None;
            t
        })
        .collect()
}

/// 50 examples over 20 binary features, labeled by a random hyperplane with
/// 10% label noise.
pub fn dataset(seed: u64) -> Vec<(FeatureVector, Label)> {
    let mut r = rng::from_seed(seed);
    let plane: Vec<f64> = (0..20).map(|_| r.gen_range(-1.0..1.0)).collect();
    (0..50)
        .map(|_| {
            let idx: Vec<u32> = (1..=20).filter(|_| r.gen_bool(0.3)).collect();
            let s: f64 = idx.iter().map(|&i| plane[i as usize - 1]).sum::<f64>() + r.gen_range(-0.3..0.3);
            let y = if (s >= 0.0) != r.gen_bool(0.1) {
                Label::Relevant
            } else {
                Label::Irrelevant
            };
            (FeatureVector::new(idx), y)
        })
        .collect()
}

pub fn dense(ex: &[(FeatureVector, Label)]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let rows = ex
        .iter()
        .map(|(x, _)| {
            let mut r = vec![0.0; 20];
            for &i in x.indices() {
                r[i as usize - 1] = 1.0;
            }
            r
        })
        .collect();
    (rows, ex.iter().map(|(_, y)| y.sign()).collect())
}
