use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    /// Pick by extension: `.jsonl` / `.ndjson` are JSON lines, anything else
    /// is plain text.
    #[default]
    Auto,
    Jsonl,
    Text,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(InputFormat::Auto),
            "jsonl" => Ok(InputFormat::Jsonl),
            "text" | "txt" => Ok(InputFormat::Text),
            other => Err(format!("unknown input format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub id: u64,
    pub text: String,
}

/// Ordered, trimmed, non-empty survey responses.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SurveyInput {
    pub responses: Vec<Response>,
}

impl SurveyInput {
    /// Plain texts numbered from 1.
    pub fn from_texts<I, S>(texts: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let responses = texts
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let text = t.as_ref().trim();
                if text.is_empty() {
                    return Err(malformed(i + 1, "empty response"));
                }
                Ok(Response {
                    id: i as u64 + 1,
                    text: text.to_string(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(SurveyInput { responses })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn texts(&self) -> Vec<String> {
        self.responses.iter().map(|r| r.text.clone()).collect()
    }
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedInput {
        line,
        reason: reason.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_survey(path: impl AsRef<Path>, format: InputFormat) -> Result<SurveyInput> {
    let path = path.as_ref();
    let format = match format {
        InputFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson") => InputFormat::Jsonl,
            _ => InputFormat::Text,
        },
        f => f,
    };
    parse_survey(&read(path)?, format)
}

pub fn parse_survey(contents: &str, format: InputFormat) -> Result<SurveyInput> {
    match format {
        InputFormat::Jsonl => parse_jsonl(contents),
        _ => SurveyInput::from_texts(contents.lines()),
    }
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: u64,
    text: String,
}

fn parse_jsonl(contents: &str) -> Result<SurveyInput> {
    let mut seen = HashSet::new();
    let mut responses = Vec::new();
    for (idx, line) in contents.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            return Err(malformed(lineno, "blank line"));
        }
        let record: JsonlRecord = serde_json::from_str(line).map_err(|e| malformed(lineno, e.to_string()))?;
        let text = record.text.trim();
        if text.is_empty() {
            return Err(malformed(lineno, "empty response text"));
        }
        if !seen.insert(record.id) {
            return Err(malformed(lineno, format!("duplicate id {}", record.id)));
        }
        responses.push(Response {
            id: record.id,
            text: text.to_string(),
        });
    }
    Ok(SurveyInput { responses })
}

/// Titles, one per line. An empty file yields an empty list.
pub fn load_titles(path: impl AsRef<Path>) -> Result<Vec<String>> {
    parse_titles(&read(path.as_ref())?)
}

pub fn parse_titles(contents: &str) -> Result<Vec<String>> {
    if contents.trim().is_empty() {
        return Ok(Vec::new());
    }
    Ok(SurveyInput::from_texts(contents.lines())?.texts())
}
