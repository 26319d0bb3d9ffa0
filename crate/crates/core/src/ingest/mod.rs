//! Record parsing, text normalization, and corpus-level filters.

mod filters;
mod normalize;
mod record;
pub mod resources;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use filters::{blocked_filter, dedup_key, deduplicate, keyword_prefilter, script_filter, stratified_sample};
pub use normalize::{
    collapse_pos, filter_stopwords, is_number_token, is_punctuation, normalize, preprocess, CodepointRange, EmojiTable,
    NormalizationConfig,
};
pub use record::{parse_records, write_records, ParseOutcome, RecordFormat};

/// Binary relevance label: 1 = relevant, 0 = irrelevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Irrelevant,
    Relevant,
}

impl Label {
    pub fn from_int(value: i64) -> Option<Label> {
        match value {
            0 => Some(Label::Irrelevant),
            1 => Some(Label::Relevant),
            _ => None,
        }
    }

    pub fn as_int(self) -> u8 {
        match self {
            Label::Irrelevant => 0,
            Label::Relevant => 1,
        }
    }

    /// `+1.0` for relevant, `-1.0` for irrelevant.
    pub fn sign(self) -> f64 {
        match self {
            Label::Irrelevant => -1.0,
            Label::Relevant => 1.0,
        }
    }

    pub fn is_relevant(self) -> bool {
        self == Label::Relevant
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_int())
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_int())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Label::from_int(v).ok_or_else(|| serde::de::Error::custom(format!("label must be 0 or 1, got {v}")))
    }
}

/// A raw text record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    /// UTC seconds.
    pub ts: i64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
}

/// A record together with its lemma stream and optional POS stream.
///
/// When `pos` is present it is aligned with `lemmas` position by position.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzedTweet {
    pub tweet: Tweet,
    pub lemmas: Vec<String>,
    pub pos: Option<Vec<String>>,
}

impl AnalyzedTweet {
    /// Wraps a tweet using the passthrough analyzer: lemmas are the
    /// whitespace-separated tokens of the text, no POS stream.
    pub fn passthrough(tweet: Tweet) -> Self {
        let lemmas = tweet.text.split_whitespace().map(str::to_owned).collect();
        AnalyzedTweet {
            tweet,
            lemmas,
            pos: None,
        }
    }

    pub fn id(&self) -> &str {
        &self.tweet.id
    }

    pub fn label(&self) -> Option<Label> {
        self.tweet.label
    }
}
