use std::collections::{BTreeSet, HashSet};

use rand::Rng as _;

use super::{AnalyzedTweet, CodepointRange};
use crate::error::{Error, Result};
use crate::rng;

/// Keeps tweets whose lemma stream contains at least one keyword. Matching is
/// exact and token-level.
pub fn keyword_prefilter(tweets: Vec<AnalyzedTweet>, keywords: &BTreeSet<String>) -> Result<Vec<AnalyzedTweet>> {
    if keywords.is_empty() {
        return Err(Error::EmptyKeywords);
    }
    Ok(tweets
        .into_iter()
        .filter(|t| t.lemmas.iter().any(|l| keywords.contains(l)))
        .collect())
}

/// Drops tweets containing any blocked token.
pub fn blocked_filter(tweets: Vec<AnalyzedTweet>, blocked: &BTreeSet<String>) -> Vec<AnalyzedTweet> {
    if blocked.is_empty() {
        return tweets;
    }
    tweets
        .into_iter()
        .filter(|t| !t.lemmas.iter().any(|l| blocked.contains(l)))
        .collect()
}

fn is_exempt(tok: &str) -> bool {
    tok == "LINK"
        || tok == "NUMBER"
        || tok
            .strip_prefix("emoji")
            .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

/// Drops tweets containing a letter outside `allowed`. Only alphabetic
/// codepoints are checked, and the `LINK`, `NUMBER`, and `emoji<N>` tokens
/// are exempt.
pub fn script_filter(tweets: Vec<AnalyzedTweet>, allowed: &[CodepointRange]) -> Vec<AnalyzedTweet> {
    let ok_char = |c: char| !c.is_alphabetic() || allowed.iter().any(|r| r.contains(c));
    tweets
        .into_iter()
        .filter(|t| {
            t.lemmas
                .iter()
                .filter(|tok| !is_exempt(tok))
                .all(|tok| tok.chars().all(ok_char))
        })
        .collect()
}

/// Token sequence with a leading retweet marker (`RT` plus the following
/// @-mention) stripped.
pub fn dedup_key(tokens: &[String]) -> &[String] {
    match tokens {
        [rt, mention, rest @ ..] if rt == "RT" && mention.starts_with('@') => rest,
        [rt, rest @ ..] if rt == "RT" => rest,
        _ => tokens,
    }
}

/// Keeps the first tweet (in input order) for every distinct [`dedup_key`].
pub fn deduplicate(tweets: Vec<AnalyzedTweet>) -> Vec<AnalyzedTweet> {
    let mut seen: HashSet<Vec<String>> = HashSet::new();
    tweets
        .into_iter()
        .filter(|t| seen.insert(dedup_key(&t.lemmas).to_vec()))
        .collect()
}

/// Sorts by timestamp, cuts the corpus into `batch_size` contiguous strata of
/// (near-)equal size, and draws one tweet uniformly from each stratum.
pub fn stratified_sample(tweets: &[AnalyzedTweet], batch_size: usize, seed: u64) -> Result<Vec<AnalyzedTweet>> {
    if batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    if batch_size > tweets.len() {
        return Err(Error::InvalidArgument(format!(
            "batch size {batch_size} exceeds corpus size {}",
            tweets.len()
        )));
    }
    let mut order: Vec<usize> = (0..tweets.len()).collect();
    order.sort_by_key(|&i| (tweets[i].tweet.ts, i));

    let n = tweets.len();
    let mut rng = rng::from_seed(seed);
    let mut batch = Vec::with_capacity(batch_size);
    for s in 0..batch_size {
        let lo = s * n / batch_size;
        let hi = (s + 1) * n / batch_size;
        let pick = rng.gen_range(lo..hi);
        batch.push(tweets[order[pick]].clone());
    }
    Ok(batch)
}
