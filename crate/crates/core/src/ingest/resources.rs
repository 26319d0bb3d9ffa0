//! Loaders for the configuration files: emoji table, word lists (stopwords,
//! keywords, blocked terms), and the POS collapse map.
//!
//! TSV files accept `#` comment lines. Word lists do not, since hashtags are
//! legitimate entries.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use super::EmojiTable;
use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn tsv_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Parses `codepoints TAB index` lines. Codepoints are hex, optionally
/// prefixed with `U+`, separated by spaces or `-`.
pub fn parse_emoji_table(text: &str, name: &str) -> Result<EmojiTable> {
    let err = |line, message: String| Error::ConfigFile {
        path: name.to_owned(),
        line,
        message,
    };
    let mut entries = Vec::new();
    for (line, l) in tsv_lines(text) {
        let (seq, idx) = l
            .split_once('\t')
            .ok_or_else(|| err(line, "expected `codepoints<TAB>index`".into()))?;
        let idx: u32 = idx
            .trim()
            .parse()
            .map_err(|_| err(line, format!("bad index {idx:?}")))?;
        let mut chars = Vec::new();
        for cp in seq.split([' ', '-']).filter(|s| !s.is_empty()) {
            let hex = cp.trim_start_matches("U+").trim_start_matches("u+");
            let c = u32::from_str_radix(hex, 16)
                .ok()
                .and_then(char::from_u32)
                .ok_or_else(|| err(line, format!("bad codepoint {cp:?}")))?;
            chars.push(c);
        }
        entries.push((chars, idx));
    }
    EmojiTable::new(entries).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{name}: {m}")),
        other => other,
    })
}

pub fn parse_pos_map(text: &str, name: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (line, l) in tsv_lines(text) {
        let (fine, coarse) = l.split_once('\t').ok_or_else(|| Error::ConfigFile {
            path: name.to_owned(),
            line,
            message: "expected `fine-tag<TAB>collapsed-tag`".into(),
        })?;
        if map.insert(fine.trim().to_owned(), coarse.trim().to_owned()).is_some() {
            return Err(Error::ConfigFile {
                path: name.to_owned(),
                line,
                message: format!("tag {fine:?} mapped twice"),
            });
        }
    }
    Ok(map)
}

/// One token per line; surrounding whitespace trimmed, blank lines skipped.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

pub fn load_emoji_table(path: &Path) -> Result<EmojiTable> {
    parse_emoji_table(&read(path)?, &path.display().to_string())
}

pub fn load_pos_map(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_pos_map(&read(path)?, &path.display().to_string())
}

pub fn load_word_list(path: &Path) -> Result<BTreeSet<String>> {
    Ok(parse_word_list(&read(path)?))
}
