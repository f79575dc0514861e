//! Corpus scoring under a difficulty criterion and easy/medium/hard tertile
//! splitting.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::NeuralScore;
use crate::surprisal::{sentence_surprisals, LogBase, NgramModel, SurprisalSequence};
use crate::textstat::{flesch_score, Document, FleschConfig, TextStats};
use crate::uid::{aggregate, uid_superlinear, uid_variance, Aggregation, UidSlConfig, UidVarConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Flesch,
    UidSl,
    UidVar,
    Neural,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::Flesch,
        Criterion::UidSl,
        Criterion::UidVar,
        Criterion::Neural,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Flesch => "flesch",
            Criterion::UidSl => "uid_sl",
            Criterion::UidVar => "uid_var",
            Criterion::Neural => "neural",
        }
    }

    pub fn needs_surprisal(self) -> bool {
        matches!(self, Criterion::UidSl | Criterion::UidVar)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown criterion {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyScore {
    #[serde(rename = "id")]
    pub doc_id: String,
    pub criterion: Criterion,
    pub value: f64,
    pub higher_is_harder: bool,
}

impl DifficultyScore {
    /// The value mapped so that larger always means harder.
    pub fn hardness(&self) -> f64 {
        if self.higher_is_harder {
            self.value
        } else {
            -self.value
        }
    }
}

/// Everything the criteria may need besides the document text.
#[derive(Debug, Clone, Default)]
pub struct ScoringContext<'a> {
    pub flesch: FleschConfig,
    pub uid_sl: UidSlConfig,
    pub uid_var: UidVarConfig,
    pub base: LogBase,
    pub aggregation: Aggregation,
    pub lm: Option<&'a NgramModel>,
    /// Imported surprisals, keyed by document id. Take precedence over `lm`.
    pub surprisals: Option<&'a HashMap<String, SurprisalSequence>>,
    pub neural: Option<&'a HashMap<String, NeuralScore>>,
}

impl ScoringContext<'_> {
    fn surprisals_for(&self, doc: &Document) -> Result<Vec<Vec<f64>>> {
        if let Some(seq) = self.surprisals.and_then(|m| m.get(&doc.id)) {
            return Ok(vec![seq.to_base(self.base).values]);
        }
        match self.lm {
            Some(lm) => sentence_surprisals(lm, doc, self.base),
            None => Err(Error::MissingSurprisal(doc.id.clone())),
        }
    }
}

pub fn score_document(doc: &Document, criterion: Criterion, ctx: &ScoringContext<'_>) -> Result<DifficultyScore> {
    let (value, higher_is_harder) = match criterion {
        Criterion::Flesch => (flesch_score(&TextStats::from_text(&doc.text)?, &ctx.flesch)?, false),
        Criterion::UidSl => {
            let sentences = ctx.surprisals_for(doc)?;
            (
                aggregate(&sentences, ctx.aggregation, |s| uid_superlinear(s, &ctx.uid_sl))?,
                true,
            )
        }
        Criterion::UidVar => {
            let sentences = ctx.surprisals_for(doc)?;
            (
                aggregate(&sentences, ctx.aggregation, |s| uid_variance(s, &ctx.uid_var))?,
                true,
            )
        }
        Criterion::Neural => {
            let score = ctx
                .neural
                .and_then(|m| m.get(&doc.id))
                .ok_or_else(|| Error::MissingScore(doc.id.clone()))?;
            (score.score, score.higher_is_harder)
        }
    };
    Ok(DifficultyScore {
        doc_id: doc.id.clone(),
        criterion,
        value,
        higher_is_harder,
    })
}

/// One score per document, in corpus order.
pub fn score_corpus(
    corpus: &[Document],
    criterion: Criterion,
    ctx: &ScoringContext<'_>,
) -> Result<Vec<DifficultyScore>> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        corpus.par_iter().map(|d| score_document(d, criterion, ctx)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        corpus.iter().map(|d| score_document(d, criterion, ctx)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Easy,
    Medium,
    Hard,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Easy, Level::Medium, Level::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Level::Easy => "easy",
            Level::Medium => "medium",
            Level::Hard => "hard",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(Level::Easy),
            "medium" | "med" => Ok(Level::Medium),
            "hard" => Ok(Level::Hard),
            other => Err(Error::invalid(format!("unknown difficulty level {other:?}"))),
        }
    }
}

/// Easy/medium/hard partition of a scored corpus.
///
/// `boundaries` holds the criterion value of the hardest easy document and of
/// the hardest medium document, in the criterion's own units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultySplit {
    pub criterion: Criterion,
    pub boundaries: [f64; 2],
    pub easy: Vec<String>,
    pub medium: Vec<String>,
    pub hard: Vec<String>,
}

/// Sizes of the three blocks for `n` documents; leftovers go to easy, then medium.
pub fn tertile_sizes(n: usize) -> [usize; 3] {
    let q = n / 3;
    let r = n % 3;
    [q + usize::from(r >= 1), q + usize::from(r >= 2), q]
}

/// Sorts easiest-first by (hardness, doc id) and cuts into three blocks.
pub fn tertile_split(scores: &[DifficultyScore]) -> Result<DifficultySplit> {
    if scores.len() < 3 {
        return Err(Error::TooSmall(scores.len()));
    }
    let first = &scores[0];
    let mut ids = HashSet::with_capacity(scores.len());
    for s in scores {
        if s.criterion != first.criterion {
            return Err(Error::invalid(format!(
                "cannot split mixed criteria {} and {}",
                first.criterion, s.criterion
            )));
        }
        if s.higher_is_harder != first.higher_is_harder {
            return Err(Error::invalid("scores disagree on direction (higher_is_harder)"));
        }
        if !s.value.is_finite() {
            return Err(Error::invalid(format!("non-finite difficulty for {:?}", s.doc_id)));
        }
        if !ids.insert(s.doc_id.as_str()) {
            return Err(Error::invalid(format!("duplicate document id {:?}", s.doc_id)));
        }
    }

    let mut sorted: Vec<&DifficultyScore> = scores.iter().collect();
    sorted.sort_by(|a, b| {
        a.hardness()
            .total_cmp(&b.hardness())
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    let [n_easy, n_medium, _] = tertile_sizes(sorted.len());
    let take =
        |range: std::ops::Range<usize>| -> Vec<String> { sorted[range].iter().map(|s| s.doc_id.clone()).collect() };
    Ok(DifficultySplit {
        criterion: first.criterion,
        boundaries: [sorted[n_easy - 1].value, sorted[n_easy + n_medium - 1].value],
        easy: take(0..n_easy),
        medium: take(n_easy..n_easy + n_medium),
        hard: take(n_easy + n_medium..sorted.len()),
    })
}

impl DifficultySplit {
    pub fn level(&self, level: Level) -> &[String] {
        match level {
            Level::Easy => &self.easy,
            Level::Medium => &self.medium,
            Level::Hard => &self.hard,
        }
    }

    pub fn len(&self) -> usize {
        self.easy.len() + self.medium.len() + self.hard.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Structural self-check: unique ids and block sizes per the remainder rule.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if n < 3 {
            return Err(Error::TooSmall(n));
        }
        let sizes = [self.easy.len(), self.medium.len(), self.hard.len()];
        if sizes != tertile_sizes(n) {
            return Err(Error::invalid(format!(
                "block sizes {sizes:?} do not match {:?}",
                tertile_sizes(n)
            )));
        }
        let mut seen = HashSet::with_capacity(n);
        for id in self.easy.iter().chain(&self.medium).chain(&self.hard) {
            if !seen.insert(id) {
                return Err(Error::invalid(format!("document {id:?} appears twice")));
            }
        }
        if !self.boundaries.iter().all(|b| b.is_finite()) {
            return Err(Error::invalid("boundaries must be finite"));
        }
        Ok(())
    }
}
