//! Synthetic labeled corpora for experiments without real data.
//!
//! Each tweet belongs to one of two classes. A per-tweet topic strength drawn
//! from a Gaussian sets the fraction of its tokens that come from the class's
//! topical word list; the rest come from a shared neutral list. Strong tweets
//! sit far from the class boundary, weak ones near it, so the corpus forms
//! two overlapping clusters in feature space.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng as _;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{AnalyzedTweet, Label, Tweet};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub size: usize,
    pub relevant_rate: f64,
    pub topic_words: usize,
    pub neutral_words: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub strength_mean: f64,
    pub strength_sd: f64,
    /// Share of a tweet's topical tokens drawn from the other class's list.
    pub crossover: f64,
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            size: 2000,
            relevant_rate: 0.62,
            topic_words: 80,
            neutral_words: 300,
            min_tokens: 6,
            max_tokens: 16,
            strength_mean: 0.45,
            strength_sd: 0.15,
            crossover: 0.1,
            label_noise: 0.02,
            seed: 0,
        }
    }
}

const POS_TAGS: [&str; 6] = ["NOUN", "VERB", "ADJ", "PREP", "PRON", "ADV"];

fn word(prefix: &str, i: usize) -> String {
    format!("{prefix}{i:03}")
}

/// Fixed tag for a word so the POS stream carries a little class signal.
fn tag_for(prefix: &str, i: usize) -> &'static str {
    let shift = match prefix {
        "rel" => 0,
        "irr" => 3,
        _ => 1,
    };
    POS_TAGS[(i * 7 + shift) % POS_TAGS.len()]
}

fn zipf(n: usize) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new((1..=n).map(|r| 1.0 / r as f64)).map_err(|e| Error::InvalidArgument(format!("word list: {e}")))
}

pub fn generate(cfg: &SynthConfig) -> Result<Vec<AnalyzedTweet>> {
    if cfg.topic_words == 0 || cfg.neutral_words == 0 {
        return Err(Error::InvalidArgument("word lists must be non-empty".into()));
    }
    if cfg.min_tokens == 0 || cfg.min_tokens > cfg.max_tokens {
        return Err(Error::InvalidArgument("token range must satisfy 1 ≤ min ≤ max".into()));
    }
    for (name, p) in [
        ("relevant_rate", cfg.relevant_rate),
        ("crossover", cfg.crossover),
        ("label_noise", cfg.label_noise),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("{name} must be in [0, 1]")));
        }
    }
    let strength = Normal::new(cfg.strength_mean, cfg.strength_sd)
        .map_err(|e| Error::InvalidArgument(format!("strength distribution: {e}")))?;
    let topic = zipf(cfg.topic_words)?;
    let neutral = zipf(cfg.neutral_words)?;
    let mut rng = rng::from_seed(cfg.seed);

    let mut out = Vec::with_capacity(cfg.size);
    for n in 0..cfg.size {
        let relevant = rng.gen_bool(cfg.relevant_rate);
        let s: f64 = strength.sample(&mut rng).clamp(0.0, 0.95);
        let len = rng.gen_range(cfg.min_tokens..=cfg.max_tokens);
        let (own, other) = if relevant { ("rel", "irr") } else { ("irr", "rel") };
        let mut lemmas = Vec::with_capacity(len);
        let mut pos = Vec::with_capacity(len);
        for _ in 0..len {
            let (prefix, i) = if rng.gen_bool(s) {
                let p = if rng.gen_bool(cfg.crossover) { other } else { own };
                (p, topic.sample(&mut rng))
            } else {
                ("com", neutral.sample(&mut rng))
            };
            lemmas.push(word(prefix, i));
            pos.push(tag_for(prefix, i).to_string());
        }
        let flip = rng.gen_bool(cfg.label_noise);
        let label = if relevant != flip {
            Label::Relevant
        } else {
            Label::Irrelevant
        };
        out.push(AnalyzedTweet {
            tweet: Tweet {
                id: format!("syn{n:06}"),
                ts: 1_400_000_000 + 60 * n as i64,
                text: lemmas.join(" "),
                label: Some(label),
            },
            lemmas,
            pos: Some(pos),
        });
    }
    Ok(out)
}
