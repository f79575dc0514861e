//! Per-token surprisal, `-log p(token | preceding tokens)`, either from the
//! built-in n-gram model or imported from a JSONL file produced elsewhere.

mod ngram;

use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::read_jsonl;
use crate::textstat::{segment_sentences, words, Document};

pub use ngram::{train_lm, ModelDump, NgramModel, BOS, EOS, UNK};

/// Logarithm base surprisal values are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LogBase {
    /// Bits.
    #[default]
    #[serde(rename = "2")]
    Two,
    /// Nats.
    #[serde(rename = "e")]
    E,
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Two => "2",
            LogBase::E => "e",
        })
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" => Ok(LogBase::E),
            other => Err(Error::invalid(format!(
                "log base must be \"2\" or \"e\", got {other:?}"
            ))),
        }
    }
}

/// Surprisal of a probability in the given base, never negative.
pub fn surprisal_from_prob(p: f64, base: LogBase) -> f64 {
    let s = match base {
        LogBase::Two => -p.log2(),
        LogBase::E => -p.ln(),
    };
    s.max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurprisalSequence {
    #[serde(rename = "id")]
    pub doc_id: String,
    #[serde(rename = "surprisals")]
    pub values: Vec<f64>,
    pub base: LogBase,
}

impl SurprisalSequence {
    pub fn new(doc_id: impl Into<String>, values: Vec<f64>, base: LogBase) -> Result<Self> {
        let seq = SurprisalSequence {
            doc_id: doc_id.into(),
            values,
            base,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::EmptyDocument(self.doc_id.clone()));
        }
        if let Some(bad) = self.values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!(
                "surprisal {bad} for document {:?} is not a finite non-negative number",
                self.doc_id
            )));
        }
        Ok(())
    }

    /// Re-expresses the values in another base.
    pub fn to_base(&self, base: LogBase) -> SurprisalSequence {
        let factor = match (self.base, base) {
            (a, b) if a == b => 1.0,
            (LogBase::Two, LogBase::E) => std::f64::consts::LN_2,
            (LogBase::E, LogBase::Two) => std::f64::consts::LOG2_E,
            _ => unreachable!(),
        };
        SurprisalSequence {
            doc_id: self.doc_id.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            base,
        }
    }
}

/// Lowercased word tokens of each sentence of `text`.
pub fn sentence_tokens(text: &str) -> Result<Vec<Vec<String>>> {
    Ok(segment_sentences(text)?
        .into_iter()
        .map(|s| words(s).into_iter().map(str::to_lowercase).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect())
}

/// Surprisal of every word of `doc`, sentence by sentence.
pub fn sentence_surprisals(model: &NgramModel, doc: &Document, base: LogBase) -> Result<Vec<Vec<f64>>> {
    let sentences = match sentence_tokens(&doc.text) {
        Err(Error::EmptyDocument(_)) => return Err(Error::EmptyDocument(doc.id.clone())),
        other => other?,
    };
    if sentences.is_empty() {
        return Err(Error::EmptyDocument(doc.id.clone()));
    }
    Ok(sentences
        .iter()
        .map(|tokens| {
            model
                .sentence_probs(tokens)
                .into_iter()
                .map(|p| surprisal_from_prob(p, base))
                .collect()
        })
        .collect())
}

/// Surprisal of every word of `doc`, concatenated across sentences.
pub fn token_surprisals(model: &NgramModel, doc: &Document, base: LogBase) -> Result<SurprisalSequence> {
    let values = sentence_surprisals(model, doc, base)?.concat();
    SurprisalSequence::new(doc.id.clone(), values, base)
}

/// Reads `{"id", "surprisals", "base"}` objects, one per line.
pub fn read_surprisals<R: BufRead>(reader: R, source_name: &str) -> Result<Vec<SurprisalSequence>> {
    read_jsonl(reader, source_name, |seq: SurprisalSequence, line| {
        seq.validate().map_err(|e| match e {
            Error::Validation(msg) => Error::invalid(format!("{source_name}:{line}: {msg}")),
            Error::EmptyDocument(id) => {
                Error::invalid(format!("{source_name}:{line}: empty surprisal list for {id:?}"))
            }
            other => other,
        })?;
        Ok(seq)
    })
}

pub fn import_surprisals(path: &Path) -> Result<Vec<SurprisalSequence>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_surprisals(std::io::BufReader::new(file), &path.display().to_string())
}
