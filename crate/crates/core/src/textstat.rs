//! Sentence segmentation, word/syllable counting, and the Flesch reading-ease
//! score.
//!
//! Everything here is a pure function of its input text. Segmentation is rule
//! based: a sentence ends after `.`, `?` or `!` (plus any closing quotes or
//! brackets) when the next word starts with an uppercase letter, unless the
//! token ending in `.` is a known abbreviation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tokens that end in `.` without ending a sentence. Compared lowercased.
const ABBREVIATIONS: &[&str] = &[
    "dr.", "mr.", "mrs.", "ms.", "prof.", "st.", "jr.", "sr.", "etc.", "e.g.", "i.e.", "vs.",
];

/// A text unit of a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let doc = Document {
            id: id.into(),
            text: text.into(),
        };
        doc.validate()?;
        Ok(doc)
    }

    /// Checks the id is non-empty and the text is not blank.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::invalid("document id must be non-empty"));
        }
        if self.text.trim().is_empty() {
            return Err(Error::EmptyDocument(self.id.clone()));
        }
        Ok(())
    }
}

/// Counts feeding the Flesch formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextStats {
    pub sentences: usize,
    pub words: usize,
    pub syllables: usize,
}

impl TextStats {
    pub fn new(sentences: usize, words: usize, syllables: usize) -> Self {
        TextStats {
            sentences,
            words,
            syllables,
        }
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let sentences = segment_sentences(text)?.len();
        let tokens = words(text);
        let syllables = tokens.iter().map(|w| count_syllables(w)).sum();
        Ok(TextStats {
            sentences,
            words: tokens.len(),
            syllables,
        })
    }
}

/// Coefficients of the reading-ease formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FleschConfig {
    pub base: f64,
    pub words_per_sentence: f64,
    pub syllables_per_word: f64,
}

impl Default for FleschConfig {
    fn default() -> Self {
        FleschConfig {
            base: 206.835,
            words_per_sentence: 1.015,
            syllables_per_word: 84.6,
        }
    }
}

/// `base − a·words/sentences − b·syllables/words`. Higher means easier.
pub fn flesch_score(stats: &TextStats, config: &FleschConfig) -> Result<f64> {
    if stats.sentences == 0 || stats.words == 0 {
        return Err(Error::DegenerateStats {
            sentences: stats.sentences,
            words: stats.words,
        });
    }
    let words = stats.words as f64;
    Ok(config.base
        - config.words_per_sentence * words / stats.sentences as f64
        - config.syllables_per_word * stats.syllables as f64 / words)
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '\u{201c}' | '\u{2018}')
}

/// Splits `text` into trimmed sentences.
///
/// Joining the result with single spaces reproduces the input up to
/// whitespace collapsing.
pub fn segment_sentences(text: &str) -> Result<Vec<&str>> {
    if text.trim().is_empty() {
        return Err(Error::EmptyDocument("text is empty".into()));
    }
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < chars.len() && is_terminator(chars[j].1) {
            j += 1;
        }
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let has_gap = k > j;
        let mut m = k;
        while m < chars.len() && is_opener(chars[m].1) {
            m += 1;
        }
        let next_upper = chars.get(m).is_some_and(|&(_, c)| c.is_uppercase());
        if has_gap && next_upper && !ends_with_abbreviation(&text[start..pos + c.len_utf8()]) {
            let sentence = text[start..end].trim();
            if !sentence.is_empty() {
                sentences.push(sentence);
            }
            start = chars[k].0;
        }
        i = k.max(i + 1);
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail);
    }
    Ok(sentences)
}

fn ends_with_abbreviation(prefix: &str) -> bool {
    if !prefix.ends_with('.') {
        return false;
    }
    let last = prefix
        .rsplit(|c: char| c.is_whitespace() || is_opener(c))
        .next()
        .unwrap_or("");
    let last = last.to_lowercase();
    ABBREVIATIONS.contains(&last.as_str())
}

/// Whitespace tokens with leading/trailing punctuation removed.
///
/// Hyphenated compounds stay one word. A token made only of punctuation or
/// symbols is kept as-is so that it still counts as a word.
pub fn words(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|tok| {
            let stripped = tok.trim_matches(|c: char| !c.is_alphanumeric());
            if stripped.is_empty() {
                tok
            } else {
                stripped
            }
        })
        .collect()
}

/// Vowel-group syllable estimate, never below 1.
///
/// `y` is a vowel only after a consonant. A trailing `e` that forms its own
/// vowel group is treated as silent. Tokens with no letters count as 1.
pub fn count_syllables(word: &str) -> usize {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if letters.is_empty() {
        return 1;
    }
    let mut groups = 0usize;
    let mut prev_vowel = false;
    for (i, &c) in letters.iter().enumerate() {
        let vowel = matches!(c, 'a' | 'e' | 'i' | 'o' | 'u') || (c == 'y' && i > 0 && !prev_vowel);
        if vowel && !prev_vowel {
            groups += 1;
        }
        prev_vowel = vowel;
    }
    let n = letters.len();
    if n >= 2 && letters[n - 1] == 'e' && !is_plain_vowel(letters[n - 2]) && groups > 1 {
        groups -= 1;
    }
    groups.max(1)
}

fn is_plain_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}
