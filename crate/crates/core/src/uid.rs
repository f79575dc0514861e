//! Uniform-information-density difficulty scores.
//!
//! Both scores are returned as the inverse-UID quantity itself, so higher
//! values mean harder (less uniform) text.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UidSlConfig {
    /// Super-linearity exponent, must be positive.
    pub k: f64,
}

impl Default for UidSlConfig {
    fn default() -> Self {
        UidSlConfig { k: 1.25 }
    }
}

impl UidSlConfig {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::invalid(format!("UID exponent k must be > 0, got {k}")));
        }
        Ok(UidSlConfig { k })
    }
}

/// `mu_lang` is interpreted in whatever base the surprisals are in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UidVarConfig {
    pub mu_lang: f64,
}

impl Default for UidVarConfig {
    fn default() -> Self {
        UidVarConfig { mu_lang: 3.8845 }
    }
}

impl UidVarConfig {
    pub fn new(mu_lang: f64) -> Result<Self> {
        if !mu_lang.is_finite() {
            return Err(Error::invalid("mu_lang must be finite"));
        }
        Ok(UidVarConfig { mu_lang })
    }
}

/// How a multi-sentence document is reduced to one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Score the concatenated token surprisals of the whole document.
    #[default]
    Concatenate,
    /// Score each sentence separately and average the sentence scores.
    SentenceMean,
}

/// Mean of `s^k` over the sequence.
pub fn uid_superlinear(surprisals: &[f64], cfg: &UidSlConfig) -> Result<f64> {
    if surprisals.is_empty() {
        return Err(Error::EmptyDocument("empty surprisal sequence".into()));
    }
    let sum: f64 = surprisals.iter().map(|s| s.powf(cfg.k)).sum();
    Ok(sum / surprisals.len() as f64)
}

/// Mean squared deviation of the sequence from `mu_lang`.
pub fn uid_variance(surprisals: &[f64], cfg: &UidVarConfig) -> Result<f64> {
    if surprisals.is_empty() {
        return Err(Error::EmptyDocument("empty surprisal sequence".into()));
    }
    let sum: f64 = surprisals
        .iter()
        .map(|s| {
            let d = s - cfg.mu_lang;
            d * d
        })
        .sum();
    Ok(sum / surprisals.len() as f64)
}

/// Applies `score` per the aggregation mode to sentence-level surprisals.
pub fn aggregate<F>(sentences: &[Vec<f64>], mode: Aggregation, score: F) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    match mode {
        Aggregation::Concatenate => score(&sentences.concat()),
        Aggregation::SentenceMean => {
            let scored = sentences
                .iter()
                .filter(|s| !s.is_empty())
                .map(|s| score(s))
                .collect::<Result<Vec<f64>>>()?;
            if scored.is_empty() {
                return Err(Error::EmptyDocument("no scored sentences".into()));
            }
            Ok(scored.iter().sum::<f64>() / scored.len() as f64)
        }
    }
}
