//! Binary bag-of-ngrams features over lemma and POS streams.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{AnalyzedTweet, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamKind {
    Lemma,
    Pos,
}

impl fmt::Display for StreamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StreamKind::Lemma => "lemma",
            StreamKind::Pos => "pos",
        })
    }
}

impl FromStr for StreamKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemma" => Ok(StreamKind::Lemma),
            "pos" => Ok(StreamKind::Pos),
            _ => Err(Error::Config(format!("unknown stream kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSource {
    Lemma,
    Pos,
    Both,
}

/// How the `min_count` threshold is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Total occurrences across the corpus.
    #[default]
    Occurrences,
    /// Number of tweets containing the ngram.
    DocumentFrequency,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub lemma_orders: BTreeSet<usize>,
    pub pos_orders: BTreeSet<usize>,
    pub min_count: usize,
    #[serde(default)]
    pub count_mode: CountMode,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig::preset("lex1").expect("lex1 preset")
    }
}

impl FeatureConfig {
    pub const PRESETS: [&'static str; 6] = ["pos1", "pos1-2", "pos1-3", "lex1", "lex1-2", "lex1-2_pos1-3"];

    /// One of the six named feature sets, with `min_count` 3. Names are
    /// case-insensitive.
    pub fn preset(name: &str) -> Result<Self> {
        let (lex, pos): (&[usize], &[usize]) = match name.to_ascii_lowercase().as_str() {
            "pos1" => (&[], &[1]),
            "pos1-2" => (&[], &[1, 2]),
            "pos1-3" => (&[], &[1, 2, 3]),
            "lex1" => (&[1], &[]),
            "lex1-2" => (&[1, 2], &[]),
            "lex1-2_pos1-3" => (&[1, 2], &[1, 2, 3]),
            _ => return Err(Error::Config(format!("unknown feature set {name:?}"))),
        };
        Ok(FeatureConfig {
            lemma_orders: lex.iter().copied().collect(),
            pos_orders: pos.iter().copied().collect(),
            min_count: 3,
            count_mode: CountMode::Occurrences,
        })
    }

    pub fn with_min_count(mut self, min_count: usize) -> Self {
        self.min_count = min_count;
        self
    }

    pub fn source(&self) -> FeatureSource {
        match (self.lemma_orders.is_empty(), self.pos_orders.is_empty()) {
            (false, true) => FeatureSource::Lemma,
            (true, false) => FeatureSource::Pos,
            _ => FeatureSource::Both,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lemma_orders.is_empty() && self.pos_orders.is_empty() {
            return Err(Error::Config("no ngram order selected".into()));
        }
        if self.lemma_orders.iter().any(|&n| !(1..=2).contains(&n)) {
            return Err(Error::Config("lemma orders must be within 1..=2".into()));
        }
        if self.pos_orders.iter().any(|&n| !(1..=3).contains(&n)) {
            return Err(Error::Config("POS orders must be within 1..=3".into()));
        }
        if self.min_count == 0 {
            return Err(Error::Config("min_count must be at least 1".into()));
        }
        Ok(())
    }

    fn orders(&self, kind: StreamKind) -> &BTreeSet<usize> {
        match kind {
            StreamKind::Lemma => &self.lemma_orders,
            StreamKind::Pos => &self.pos_orders,
        }
    }
}

impl FromStr for FeatureConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureConfig::preset(s)
    }
}

/// Sorted, duplicate-free feature indices (1-based). Every listed feature has
/// value 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    indices: Vec<u32>,
}

impl FeatureVector {
    pub fn new(mut indices: Vec<u32>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        FeatureVector { indices }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `label index:1 index:1 ...`, label written `+1`, `-1`, or `0` when
    /// unknown.
    pub fn to_sparse_line(&self, label: Option<Label>) -> String {
        let mut s = String::from(match label {
            Some(Label::Relevant) => "+1",
            Some(Label::Irrelevant) => "-1",
            None => "0",
        });
        for i in &self.indices {
            let _ = write!(s, " {i}:1");
        }
        s
    }

    pub fn parse_sparse_line(line: &str) -> Result<(Option<Label>, FeatureVector)> {
        let mut parts = line.split_whitespace();
        let label = match parts.next() {
            Some("+1") | Some("1") => Some(Label::Relevant),
            Some("-1") => Some(Label::Irrelevant),
            Some("0") => None,
            other => return Err(Error::Config(format!("bad sparse label {other:?}"))),
        };
        let mut indices = Vec::new();
        for p in parts {
            let (i, v) = p
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("bad sparse entry {p:?}")))?;
            if v != "1" {
                return Err(Error::Config(format!("non-binary value in {p:?}")));
            }
            indices.push(i.parse().map_err(|_| Error::Config(format!("bad index in {p:?}")))?);
        }
        Ok((label, FeatureVector::new(indices)))
    }
}

/// Ngram vocabulary. Entries are ordered by (kind, token tuple) and numbered
/// densely from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    entries: Vec<(StreamKind, Vec<String>)>,
    lemma_index: HashMap<String, u32>,
    pos_index: HashMap<String, u32>,
    lemma_max_order: usize,
    pos_max_order: usize,
    config: FeatureConfig,
}

fn stream(t: &AnalyzedTweet, kind: StreamKind) -> Option<&[String]> {
    match kind {
        StreamKind::Lemma => Some(&t.lemmas),
        StreamKind::Pos => t.pos.as_deref(),
    }
}

fn for_each_ngram(tokens: &[String], n: usize, buf: &mut String, mut f: impl FnMut(&str)) {
    if n == 0 || tokens.len() < n {
        return;
    }
    for w in tokens.windows(n) {
        buf.clear();
        for (j, t) in w.iter().enumerate() {
            if j > 0 {
                buf.push(' ');
            }
            buf.push_str(t);
        }
        f(buf);
    }
}

const KINDS: [StreamKind; 2] = [StreamKind::Lemma, StreamKind::Pos];

/// Collects every ngram of the configured orders whose count reaches
/// `min_count`.
pub fn build_vocabulary<'a, I>(corpus: I, cfg: &FeatureConfig) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a AnalyzedTweet>,
{
    cfg.validate()?;
    let mut counts: HashMap<(StreamKind, String), usize> = HashMap::new();
    let mut n_docs = 0usize;
    let mut buf = String::new();
    let mut seen_in_doc: HashSet<(StreamKind, String)> = HashSet::new();

    for t in corpus {
        n_docs += 1;
        seen_in_doc.clear();
        for kind in KINDS {
            let orders = cfg.orders(kind);
            if orders.is_empty() {
                continue;
            }
            let tokens = stream(t, kind).ok_or_else(|| Error::MissingStream {
                id: t.tweet.id.clone(),
                stream: "pos",
            })?;
            for &n in orders {
                for_each_ngram(tokens, n, &mut buf, |g| match cfg.count_mode {
                    CountMode::Occurrences => {
                        *counts.entry((kind, g.to_owned())).or_default() += 1;
                    }
                    CountMode::DocumentFrequency => {
                        if seen_in_doc.insert((kind, g.to_owned())) {
                            *counts.entry((kind, g.to_owned())).or_default() += 1;
                        }
                    }
                });
            }
        }
    }
    if n_docs == 0 {
        return Err(Error::EmptyInput("vocabulary corpus"));
    }

    let mut entries: Vec<(StreamKind, Vec<String>)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= cfg.min_count)
        .map(|((kind, g), _)| (kind, g.split(' ').map(str::to_owned).collect()))
        .collect();
    entries.sort();
    Ok(Vocabulary::from_entries(entries, cfg.clone()))
}

impl Vocabulary {
    fn from_entries(entries: Vec<(StreamKind, Vec<String>)>, config: FeatureConfig) -> Self {
        let mut lemma_index = HashMap::new();
        let mut pos_index = HashMap::new();
        let mut lemma_max_order = 0;
        let mut pos_max_order = 0;
        for (i, (kind, toks)) in entries.iter().enumerate() {
            let idx = i as u32 + 1;
            let key = toks.join(" ");
            match kind {
                StreamKind::Lemma => {
                    lemma_index.insert(key, idx);
                    lemma_max_order = lemma_max_order.max(toks.len());
                }
                StreamKind::Pos => {
                    pos_index.insert(key, idx);
                    pos_max_order = pos_max_order.max(toks.len());
                }
            }
        }
        Vocabulary {
            entries,
            lemma_index,
            pos_index,
            lemma_max_order,
            pos_max_order,
            config,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    /// Entry for a 1-based index.
    pub fn entry(&self, index: u32) -> Option<(StreamKind, &[String])> {
        let i = (index as usize).checked_sub(1)?;
        self.entries.get(i).map(|(k, t)| (*k, t.as_slice()))
    }

    pub fn index_of(&self, kind: StreamKind, tokens: &[&str]) -> Option<u32> {
        let key = tokens.join(" ");
        match kind {
            StreamKind::Lemma => self.lemma_index.get(&key).copied(),
            StreamKind::Pos => self.pos_index.get(&key).copied(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, StreamKind, &[String])> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, (k, t))| (i as u32 + 1, *k, t.as_slice()))
    }

    /// Marks every in-vocabulary ngram present in the tweet. Streams the
    /// tweet lacks contribute nothing.
    pub fn vectorize(&self, tweet: &AnalyzedTweet) -> FeatureVector {
        let mut indices = Vec::new();
        let mut buf = String::new();
        for kind in KINDS {
            let (index, max_order) = match kind {
                StreamKind::Lemma => (&self.lemma_index, self.lemma_max_order),
                StreamKind::Pos => (&self.pos_index, self.pos_max_order),
            };
            let Some(tokens) = stream(tweet, kind) else {
                continue;
            };
            for n in 1..=max_order {
                for_each_ngram(tokens, n, &mut buf, |g| {
                    if let Some(&i) = index.get(g) {
                        indices.push(i);
                    }
                });
            }
        }
        FeatureVector::new(indices)
    }

    /// `index TAB kind TAB tokens-joined-by-space`, one line per entry.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, kind, toks) in self.entries() {
            let _ = writeln!(s, "{i}\t{kind}\t{}", toks.join(" "));
        }
        s
    }

    /// Reads the [`Vocabulary::to_text`] format. The feature configuration is
    /// reconstructed from the orders present; `min_count` is unknown and set
    /// to 1.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |m: &str| Error::Config(format!("vocabulary line {}: {m}", lineno + 1));
            let mut parts = line.splitn(3, '\t');
            let idx: u32 = parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| bad("bad index"))?;
            if idx as usize != entries.len() + 1 {
                return Err(bad("indices must be dense and ascending from 1"));
            }
            let kind: StreamKind = parts.next().ok_or_else(|| bad("missing kind"))?.parse()?;
            let toks: Vec<String> = parts
                .next()
                .ok_or_else(|| bad("missing ngram"))?
                .split(' ')
                .map(str::to_owned)
                .collect();
            entries.push((kind, toks));
        }
        let mut config = FeatureConfig {
            lemma_orders: BTreeSet::new(),
            pos_orders: BTreeSet::new(),
            min_count: 1,
            count_mode: CountMode::Occurrences,
        };
        for (kind, toks) in &entries {
            match kind {
                StreamKind::Lemma => config.lemma_orders.insert(toks.len()),
                StreamKind::Pos => config.pos_orders.insert(toks.len()),
            };
        }
        Ok(Vocabulary::from_entries(entries, config))
    }
}
