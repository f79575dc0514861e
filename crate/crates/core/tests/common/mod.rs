//! Test-only reference implementations, kept independent of the library's
//! own code paths.

#![allow(dead_code)]

use std::path::PathBuf;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Brute-force interpolated Kneser-Ney over whitespace-tokenised sentences.
///
/// Every quantity is recomputed by scanning the padded sentences; nothing is
/// cached or indexed.
pub struct NaiveKneserNey {
    pub order: usize,
    pub discount: f64,
    pub sentences: Vec<Vec<String>>,
    pub vocab: Vec<String>,
}

impl NaiveKneserNey {
    pub fn new(texts: &[String], order: usize, discount: f64) -> Self {
        let mut vocab: Vec<String> = vec![UNK.into(), BOS.into(), EOS.into()];
        let mut sentences = Vec::new();
        for t in texts {
            let mut s = vec![BOS.to_string()];
            for w in t.split_whitespace() {
                let w = w.to_lowercase();
                if !vocab.contains(&w) {
                    vocab.push(w.clone());
                }
                s.push(w);
            }
            s.push(EOS.to_string());
            sentences.push(s);
        }
        NaiveKneserNey {
            order,
            discount,
            sentences,
            vocab,
        }
    }

    /// Occurrences of `gram` ending at a predicted position (index >= 1).
    fn raw(&self, gram: &[String]) -> usize {
        let m = gram.len();
        let mut n = 0;
        for s in &self.sentences {
            for end in 1..s.len() {
                if end + 1 >= m && s[end + 1 - m..=end] == *gram {
                    n += 1;
                }
            }
        }
        n
    }

    /// Number of distinct tokens seen immediately before `gram`.
    fn left_types(&self, gram: &[String]) -> usize {
        let m = gram.len();
        let mut left: Vec<&String> = Vec::new();
        for s in &self.sentences {
            for end in 1..s.len() {
                if end >= m && s[end + 1 - m..=end] == *gram {
                    let x = &s[end - m];
                    if !left.contains(&x) {
                        left.push(x);
                    }
                }
            }
        }
        left.len()
    }

    fn adjusted(&self, gram: &[String]) -> usize {
        if gram.len() == self.order || gram[0] == BOS {
            self.raw(gram)
        } else {
            self.left_types(gram)
        }
    }

    fn level(&self, context: &[String], word: &str) -> f64 {
        let lower = if context.is_empty() {
            1.0 / self.vocab.len() as f64
        } else {
            self.level(&context[1..], word)
        };
        let mut total = 0usize;
        let mut types = 0usize;
        let mut count = 0usize;
        for v in &self.vocab {
            let mut g = context.to_vec();
            g.push(v.clone());
            let a = self.adjusted(&g);
            total += a;
            if a > 0 {
                types += 1;
            }
            if v == word {
                count = a;
            }
        }
        if total == 0 {
            return lower;
        }
        ((count as f64 - self.discount).max(0.0) + self.discount * types as f64 * lower) / total as f64
    }

    pub fn prob(&self, context: &[&str], word: &str) -> f64 {
        let known = |t: &str| {
            let t = t.to_lowercase();
            if self.vocab.contains(&t) {
                t
            } else {
                UNK.to_string()
            }
        };
        let mut ctx: Vec<String> = context.iter().map(|t| known(t)).collect();
        let keep = self.order - 1;
        if ctx.len() > keep {
            ctx.drain(..ctx.len() - keep);
        }
        if let Some(p) = ctx.iter().rposition(|t| t == BOS) {
            ctx.drain(..p);
        }
        self.level(&ctx, &known(word))
    }
}

/// Logical score from the descending permutation of distinct values.
pub fn score_by_permutation(easy: f64, medium: f64, hard: f64, higher_is_better: bool) -> f64 {
    let sign = if higher_is_better { 1.0 } else { -1.0 };
    let mut labelled = [('e', sign * easy), ('m', sign * medium), ('h', sign * hard)];
    labelled.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let perm: String = labelled.iter().map(|l| l.0).collect();
    match perm.as_str() {
        "emh" => 0.75,
        "ehm" => 0.375,
        "mhe" | "meh" => 0.0,
        "hem" => -0.375,
        "hme" => -0.75,
        _ => unreachable!(),
    }
}
