//! Line-oriented file formats shared by the modules: corpus JSONL, neural
//! score JSONL, and a generic JSONL reader/writer.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::splitkit::DifficultyScore;
use crate::textstat::Document;

/// Parses one JSON object per non-blank line, running `check` on each.
/// Line numbers are 1-based.
pub fn read_jsonl<T, U, R, F>(reader: R, source_name: &str, mut check: F) -> Result<Vec<U>>
where
    T: DeserializeOwned,
    R: BufRead,
    F: FnMut(T, usize) -> Result<U>,
{
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: T = serde_json::from_str(&line).map_err(|e| Error::parse(source_name, lineno, e.to_string()))?;
        out.push(check(value, lineno)?);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize, W: Write>(mut writer: W, items: &[T]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut writer, item)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub(crate) fn open(path: &Path) -> Result<std::io::BufReader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufReader::new(file))
}

/// Reads `{"id", "text"}` lines. Ids must be unique; the corpus must be non-empty.
pub fn read_corpus<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<Document>> {
    let mut seen = HashSet::new();
    let docs = read_jsonl(reader, source_name, |doc: Document, line| {
        doc.validate()
            .map_err(|e| Error::invalid(format!("{source_name}:{line}: {e}")))?;
        if !seen.insert(doc.id.clone()) {
            return Err(Error::invalid(format!(
                "{source_name}:{line}: duplicate document id {:?}",
                doc.id
            )));
        }
        Ok(doc)
    })?;
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(docs)
}

pub fn load_corpus(path: &Path) -> Result<Vec<Document>> {
    read_corpus(open(path)?, &path.display().to_string())
}

/// An externally produced difficulty score for one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralScore {
    pub id: String,
    pub score: f64,
    /// Defaults to `true` when the field is absent.
    #[serde(default = "default_true")]
    pub higher_is_harder: bool,
}

fn default_true() -> bool {
    true
}

pub fn read_neural_scores<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<NeuralScore>> {
    let mut seen = HashSet::new();
    read_jsonl(reader, source_name, |s: NeuralScore, line| {
        if !s.score.is_finite() {
            return Err(Error::invalid(format!("{source_name}:{line}: score must be finite")));
        }
        if !seen.insert(s.id.clone()) {
            return Err(Error::invalid(format!("{source_name}:{line}: duplicate id {:?}", s.id)));
        }
        Ok(s)
    })
}

pub fn load_neural_scores(path: &Path) -> Result<Vec<NeuralScore>> {
    read_neural_scores(open(path)?, &path.display().to_string())
}

/// Reads scored-corpus lines as written by the `score` step.
pub fn read_scores<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<DifficultyScore>> {
    let mut seen = HashSet::new();
    let scores = read_jsonl(reader, source_name, |s: DifficultyScore, line| {
        if !s.value.is_finite() {
            return Err(Error::invalid(format!("{source_name}:{line}: value must be finite")));
        }
        if !seen.insert(s.doc_id.clone()) {
            return Err(Error::invalid(format!(
                "{source_name}:{line}: duplicate id {:?}",
                s.doc_id
            )));
        }
        Ok(s)
    })?;
    if let Some(first) = scores.first() {
        if let Some(other) = scores.iter().find(|s| s.criterion != first.criterion) {
            return Err(Error::invalid(format!(
                "{source_name}: mixed criteria {} and {}",
                first.criterion.as_str(),
                other.criterion.as_str()
            )));
        }
    }
    Ok(scores)
}

pub fn load_scores(path: &Path) -> Result<Vec<DifficultyScore>> {
    read_scores(open(path)?, &path.display().to_string())
}
