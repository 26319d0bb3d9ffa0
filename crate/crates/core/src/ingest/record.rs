use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{AnalyzedTweet, Label, Tweet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecordFormat {
    /// One JSON object per line with `id`, `ts`, `text` and optional
    /// `lemmas`, `pos`, `label`.
    #[default]
    JsonLines,
    /// One raw text per line; the id is `L<line>` and the timestamp is the
    /// line number.
    PlainText,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    ts: i64,
    text: String,
    #[serde(default)]
    lemmas: Option<Vec<String>>,
    #[serde(default)]
    pos: Option<Vec<String>>,
    #[serde(default)]
    label: Option<i64>,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    ts: i64,
    text: &'a str,
    lemmas: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    pos: Option<&'a [String]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<Label>,
}

/// Parsed records plus per-line errors. Malformed lines never abort parsing.
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub records: Vec<AnalyzedTweet>,
    /// 1-based source line of each record in `records`.
    pub lines: Vec<usize>,
    pub errors: Vec<Error>,
}

pub fn parse_records<R: BufRead>(reader: R, format: RecordFormat) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    let mut seen: HashMap<String, usize> = HashMap::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Record {
            line: lineno,
            message: format!("unreadable line: {e}"),
        });
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                out.errors.push(e);
                continue;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let parsed = match format {
            RecordFormat::JsonLines => parse_json_line(&line, lineno),
            RecordFormat::PlainText => Ok(AnalyzedTweet::passthrough(Tweet {
                id: format!("L{lineno}"),
                ts: lineno as i64,
                text: line,
                label: None,
            })),
        };
        match parsed {
            Ok(rec) => {
                if let Some(&first) = seen.get(&rec.tweet.id) {
                    out.errors.push(Error::DuplicateId {
                        id: rec.tweet.id.clone(),
                        first,
                        second: lineno,
                    });
                    continue;
                }
                seen.insert(rec.tweet.id.clone(), lineno);
                out.records.push(rec);
                out.lines.push(lineno);
            }
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}

fn parse_json_line(line: &str, lineno: usize) -> Result<AnalyzedTweet> {
    let bad = |message: String| Error::Record { line: lineno, message };
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
    if raw.id.is_empty() {
        return Err(bad("empty id".into()));
    }
    let label = match raw.label {
        None => None,
        Some(v) => Some(Label::from_int(v).ok_or_else(|| bad(format!("label must be 0 or 1, got {v}")))?),
    };
    let tweet = Tweet {
        id: raw.id,
        ts: raw.ts,
        text: raw.text,
        label,
    };
    let lemmas = match raw.lemmas {
        Some(l) => l,
        None => tweet.text.split_whitespace().map(str::to_owned).collect(),
    };
    if let Some(pos) = &raw.pos {
        if pos.len() != lemmas.len() {
            return Err(bad(format!(
                "lemma stream has {} tokens but POS stream has {}",
                lemmas.len(),
                pos.len()
            )));
        }
    }
    Ok(AnalyzedTweet {
        tweet,
        lemmas,
        pos: raw.pos,
    })
}

/// Writes records in the JSON-lines format accepted by [`parse_records`].
pub fn write_records<W: Write>(mut w: W, records: &[AnalyzedTweet]) -> std::io::Result<()> {
    for r in records {
        let out = RecordOut {
            id: &r.tweet.id,
            ts: r.tweet.ts,
            text: &r.tweet.text,
            lemmas: &r.lemmas,
            pos: r.pos.as_deref(),
            label: r.tweet.label,
        };
        serde_json::to_writer(&mut w, &out)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ParseOutcome {
        parse_records(s.as_bytes(), RecordFormat::JsonLines).unwrap()
    }

    #[test]
    fn passthrough_lemmas_when_no_analysis() {
        let out = parse(r#"{"id":"t1","ts":5,"text":"a b"}"#);
        assert!(out.errors.is_empty());
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].lemmas, vec!["a", "b"]);
        assert_eq!(out.records[0].pos, None);
    }

    #[test]
    fn lemma_pos_length_mismatch_is_reported() {
        let out = parse(r#"{"id":"t1","ts":1,"text":"x","lemmas":["a","b","c"],"pos":["N","V"]}"#);
        assert!(out.records.is_empty());
        assert_eq!(out.errors.len(), 1);
        assert!(matches!(out.errors[0], Error::Record { line: 1, .. }));
    }

    #[test]
    fn empty_stream() {
        let out = parse("");
        assert!(out.records.is_empty());
        assert!(out.errors.is_empty());
    }

    #[test]
    fn malformed_lines_do_not_stop_parsing() {
        let input = concat!(
            r#"{"id":"a","ts":1,"text":"x"}"#,
            "\n",
            r#"{"ts":2,"text":"missing id"}"#,
            "\n",
            "not json\n",
            r#"{"id":"b","ts":3,"text":"y","label":1}"#,
            "\n",
            r#"{"id":"c","ts":4,"text":"z","label":2}"#,
            "\n",
        );
        let out = parse(input);
        let ids: Vec<_> = out.records.iter().map(|r| r.id()).collect();
        assert_eq!(ids, ["a", "b"]);
        assert_eq!(out.lines, [1, 4]);
        let lines: Vec<_> = out
            .errors
            .iter()
            .map(|e| match e {
                Error::Record { line, .. } => *line,
                other => panic!("unexpected {other:?}"),
            })
            .collect();
        assert_eq!(lines, [2, 3, 5]);
        assert_eq!(out.records[1].label(), Some(Label::Relevant));
    }

    #[test]
    fn duplicate_id_names_both_lines() {
        let input = "{\"id\":\"a\",\"ts\":1,\"text\":\"x\"}\n\n{\"id\":\"a\",\"ts\":2,\"text\":\"y\"}\n";
        let out = parse(input);
        assert_eq!(out.records.len(), 1);
        match &out.errors[0] {
            Error::DuplicateId { id, first, second } => {
                assert_eq!((id.as_str(), *first, *second), ("a", 1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn write_then_parse_preserves_records() {
        let input = concat!(
            r#"{"id":"a","ts":1,"text":"x y","lemmas":["x","y"],"pos":["N","V"],"label":0}"#,
            "\n",
            r#"{"id":"b","ts":3,"text":"hello"}"#,
            "\n",
        );
        let first = parse(input);
        let mut buf = Vec::new();
        write_records(&mut buf, &first.records).unwrap();
        let second = parse(std::str::from_utf8(&buf).unwrap());
        assert_eq!(first.records, second.records);
    }

    #[test]
    fn plain_text_format() {
        let out = parse_records("hello world\n\nbye\n".as_bytes(), RecordFormat::PlainText).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[1].id(), "L3");
        assert_eq!(out.records[1].tweet.ts, 3);
    }
}
