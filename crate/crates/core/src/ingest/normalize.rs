use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::AnalyzedTweet;
use crate::error::{Error, Result};

static URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S+").expect("valid url regex"));

const BUNDLED_EMOJI: &str = include_str!("../../data/emoji_table.tsv");
const BUNDLED_POS_MAP: &str = include_str!("../../data/pos_collapse.tsv");

/// Inclusive range of Unicode scalar values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodepointRange {
    pub start: u32,
    pub end: u32,
}

impl CodepointRange {
    pub const fn new(start: u32, end: u32) -> Self {
        CodepointRange { start, end }
    }

    pub fn contains(&self, c: char) -> bool {
        (self.start..=self.end).contains(&(c as u32))
    }

    /// Standard Arabic letters, diacritics, Arabic-Indic digits, and ASCII
    /// letters. Letters used only by Persian or Urdu (U+0671 and up) are
    /// excluded.
    pub fn default_allowed() -> Vec<CodepointRange> {
        vec![
            CodepointRange::new(0x0041, 0x005A),
            CodepointRange::new(0x0061, 0x007A),
            CodepointRange::new(0x0621, 0x063A),
            CodepointRange::new(0x0640, 0x065F),
            CodepointRange::new(0x0660, 0x0669),
            CodepointRange::new(0x0670, 0x0670),
        ]
    }
}

/// Maps emoji codepoint sequences to 1-based indices. Matching is
/// longest-sequence-first.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, u32)>", into = "Vec<(String, u32)>")]
pub struct EmojiTable {
    entries: BTreeMap<Vec<char>, u32>,
    #[serde(skip)]
    by_first: HashMap<char, Vec<(Vec<char>, u32)>>,
}

impl EmojiTable {
    pub fn new<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<char>, u32)>,
    {
        let mut map = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (seq, idx) in entries {
            if seq.is_empty() {
                return Err(Error::Config("empty emoji sequence".into()));
            }
            if idx == 0 {
                return Err(Error::Config("emoji indices start at 1".into()));
            }
            if !seen.insert(idx) {
                return Err(Error::Config(format!("emoji index {idx} used twice")));
            }
            if map.insert(seq.clone(), idx).is_some() {
                let s: String = seq.iter().collect();
                return Err(Error::Config(format!("emoji sequence {s:?} listed twice")));
            }
        }
        let mut by_first: HashMap<char, Vec<(Vec<char>, u32)>> = HashMap::new();
        for (seq, &idx) in &map {
            by_first.entry(seq[0]).or_default().push((seq.clone(), idx));
        }
        for v in by_first.values_mut() {
            v.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
        }
        Ok(EmojiTable { entries: map, by_first })
    }

    /// The 842-entry table shipped with the crate.
    pub fn bundled() -> Self {
        super::resources::parse_emoji_table(BUNDLED_EMOJI, "<bundled emoji table>")
            .expect("bundled emoji table is valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, seq: &str) -> Option<u32> {
        let chars: Vec<char> = seq.chars().collect();
        self.entries.get(&chars).copied()
    }

    /// Longest entry matching at the start of `chars`, as (length, index).
    fn match_at(&self, chars: &[char]) -> Option<(usize, u32)> {
        let candidates = self.by_first.get(chars.first()?)?;
        candidates
            .iter()
            .find(|(seq, _)| chars.starts_with(seq))
            .map(|(seq, idx)| (seq.len(), *idx))
    }
}

impl TryFrom<Vec<(String, u32)>> for EmojiTable {
    type Error = Error;

    fn try_from(v: Vec<(String, u32)>) -> Result<Self> {
        EmojiTable::new(v.into_iter().map(|(s, i)| (s.chars().collect(), i)))
    }
}

impl From<EmojiTable> for Vec<(String, u32)> {
    fn from(t: EmojiTable) -> Self {
        t.entries
            .into_iter()
            .map(|(seq, i)| (seq.into_iter().collect(), i))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConfig {
    pub emoji_table: EmojiTable,
    pub stopwords: BTreeSet<String>,
    pub keep_chars: BTreeSet<char>,
    pub allowed_scripts: Vec<CodepointRange>,
    pub blocked_keywords: BTreeSet<String>,
    pub pos_collapse_map: BTreeMap<String, String>,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            emoji_table: EmojiTable::bundled(),
            stopwords: BTreeSet::new(),
            keep_chars: ['#', '@', '_'].into_iter().collect(),
            allowed_scripts: CodepointRange::default_allowed(),
            blocked_keywords: BTreeSet::new(),
            pos_collapse_map: super::resources::parse_pos_map(BUNDLED_POS_MAP, "<bundled POS map>")
                .expect("bundled POS map is valid"),
        }
    }
}

impl NormalizationConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.keep_chars.iter().find(|c| !is_punctuation(**c)) {
            return Err(Error::Config(format!("keep character {c:?} is not punctuation")));
        }
        if let Some(r) = self.allowed_scripts.iter().find(|r| r.start > r.end) {
            return Err(Error::Config(format!(
                "codepoint range {:X}..{:X} is empty",
                r.start, r.end
            )));
        }
        Ok(())
    }
}

/// Punctuation class used for stripping: ASCII punctuation and symbols plus
/// the common Latin-1, general, Arabic, CJK, and fullwidth punctuation marks.
pub fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{00A1}' | '\u{00A7}' | '\u{00AB}' | '\u{00B6}' | '\u{00B7}' | '\u{00BB}' | '\u{00BF}'
                | '\u{060C}' | '\u{060D}' | '\u{061B}' | '\u{061E}' | '\u{061F}'
                | '\u{066A}'..='\u{066D}'
                | '\u{06D4}'
                | '\u{2010}'..='\u{2027}'
                | '\u{2030}'..='\u{205E}'
                | '\u{3001}'..='\u{3003}'
                | '\u{3008}'..='\u{3011}'
                | '\u{3014}'..='\u{301F}'
                | '\u{FD3E}' | '\u{FD3F}'
                | '\u{FF01}'..='\u{FF0F}'
                | '\u{FF1A}'..='\u{FF20}'
                | '\u{FF3B}'..='\u{FF40}'
                | '\u{FF5B}'..='\u{FF65}'
        )
}

fn is_digit(c: char) -> bool {
    c.is_ascii_digit() || matches!(c, '\u{0660}'..='\u{0669}' | '\u{06F0}'..='\u{06F9}')
}

/// True for a nonempty token made only of ASCII or Arabic-Indic digits.
pub fn is_number_token(tok: &str) -> bool {
    !tok.is_empty() && tok.chars().all(is_digit)
}

fn is_line_break(c: char) -> bool {
    matches!(
        c,
        '\n' | '\r' | '\u{0B}' | '\u{0C}' | '\u{85}' | '\u{2028}' | '\u{2029}'
    )
}

/// Normalizes raw text into a token list.
///
/// Table emojis become `emoji<N>`, URLs become `LINK`, digit-only tokens
/// become `NUMBER`, line breaks are dropped, and punctuation outside
/// `keep_chars` acts as a token separator. Unknown emojis pass through.
pub fn normalize(text: &str, cfg: &NormalizationConfig) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut spaced = String::with_capacity(text.len() + 16);
    let mut i = 0;
    while i < chars.len() {
        if let Some((len, idx)) = cfg.emoji_table.match_at(&chars[i..]) {
            spaced.push_str(" emoji");
            spaced.push_str(&idx.to_string());
            spaced.push(' ');
            i += len;
            continue;
        }
        let c = chars[i];
        spaced.push(if is_line_break(c) { ' ' } else { c });
        i += 1;
    }
    let linked = URL.replace_all(&spaced, " LINK ");

    let mut out = Vec::new();
    for raw in linked.split_whitespace() {
        let mut piece = String::new();
        for c in raw.chars() {
            if is_punctuation(c) && !cfg.keep_chars.contains(&c) {
                push_token(&mut out, &mut piece);
            } else {
                piece.push(c);
            }
        }
        push_token(&mut out, &mut piece);
    }
    out
}

fn push_token(out: &mut Vec<String>, piece: &mut String) {
    if piece.is_empty() {
        return;
    }
    if is_number_token(piece) {
        out.push("NUMBER".to_owned());
        piece.clear();
    } else {
        out.push(std::mem::take(piece));
    }
}

/// Drops every token in `stopwords`, keeping the order of the rest.
pub fn filter_stopwords(tokens: Vec<String>, stopwords: &BTreeSet<String>) -> Vec<String> {
    if stopwords.is_empty() {
        return tokens;
    }
    tokens.into_iter().filter(|t| !stopwords.contains(t)).collect()
}

/// Maps fine POS tags to collapsed tags. Tags absent from the map are kept.
pub fn collapse_pos(tags: &[String], map: &BTreeMap<String, String>) -> Vec<String> {
    tags.iter()
        .map(|t| map.get(t).cloned().unwrap_or_else(|| t.clone()))
        .collect()
}

/// Cleans one analyzed record: each lemma is normalized in place (a lemma
/// may expand to several tokens or vanish; its POS tag follows it), POS tags
/// are collapsed, then stopword lemmas are removed together with their
/// aligned tag. The raw text is kept untouched.
pub fn preprocess(rec: &AnalyzedTweet, cfg: &NormalizationConfig) -> AnalyzedTweet {
    let collapsed = rec.pos.as_ref().map(|p| collapse_pos(p, &cfg.pos_collapse_map));
    let mut lemmas = Vec::with_capacity(rec.lemmas.len());
    let mut pos = collapsed.as_ref().map(|_| Vec::with_capacity(rec.lemmas.len()));

    for (i, lemma) in rec.lemmas.iter().enumerate() {
        for tok in normalize(lemma, cfg) {
            if cfg.stopwords.contains(&tok) {
                continue;
            }
            if let (Some(pos), Some(tags)) = (pos.as_mut(), collapsed.as_ref()) {
                pos.push(tags[i].clone());
            }
            lemmas.push(tok);
        }
    }
    AnalyzedTweet {
        tweet: rec.tweet.clone(),
        lemmas,
        pos,
    }
}
