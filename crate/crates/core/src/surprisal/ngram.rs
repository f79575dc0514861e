//! Interpolated Kneser-Ney n-gram model (orders 1 to 3, single discount).
//!
//! Every sentence is padded as `<s> w1 .. wn </s>`. N-grams are collected at
//! each predicted position (`w1 .. </s>`), so `<s>` only ever appears as the
//! first element of an n-gram. Highest-order n-grams and n-grams starting with
//! `<s>` use raw counts; every other lower-order n-gram uses its continuation
//! count (number of distinct left neighbours). The unigram level interpolates
//! with the uniform distribution over the vocabulary, so every vocabulary
//! item, `<unk>` included, has non-zero probability.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textstat::Document;

use super::sentence_tokens;

pub const UNK: &str = "<unk>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

const UNK_ID: u32 = 0;
const BOS_ID: u32 = 1;
const EOS_ID: u32 = 2;

const DUMP_FORMAT: &str = "hlmkit-ngram";
const DUMP_VERSION: u32 = 1;

type Gram = Vec<u32>;

#[derive(Debug, Clone, Default)]
struct ContextTable {
    total: u64,
    counts: HashMap<u32, u64>,
}

#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    discount: f64,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    /// `raw[k - 1]` holds counts of k-grams ending at predicted positions.
    raw: Vec<BTreeMap<Gram, u64>>,
    /// `levels[m - 1]` maps an (m-1)-token context to adjusted counts.
    levels: Vec<HashMap<Gram, ContextTable>>,
}

/// On-disk form of a model: the vocabulary and raw n-gram counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub format: String,
    pub version: u32,
    pub order: usize,
    pub discount: f64,
    pub vocab: Vec<String>,
    /// One list per n-gram length, each sorted by token ids.
    pub ngrams: Vec<Vec<(Vec<u32>, u64)>>,
}

/// Trains an interpolated Kneser-Ney model on lowercased sentence tokens.
pub fn train_lm(corpus: &[Document], order: usize, discount: f64) -> Result<NgramModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    check_params(order, discount)?;

    let mut sentences: Vec<Vec<String>> = Vec::new();
    for doc in corpus {
        doc.validate()?;
        sentences.extend(sentence_tokens(&doc.text)?);
    }
    let words: BTreeSet<&str> = sentences
        .iter()
        .flatten()
        .map(String::as_str)
        .filter(|w| ![UNK, BOS, EOS].contains(w))
        .collect();
    let vocab: Vec<String> = [UNK, BOS, EOS].into_iter().chain(words).map(str::to_string).collect();
    let index = build_index(&vocab);

    let mut raw = vec![BTreeMap::new(); order];
    for sentence in &sentences {
        let mut seq = Vec::with_capacity(sentence.len() + 2);
        seq.push(BOS_ID);
        seq.extend(sentence.iter().map(|w| index[w.as_str()]));
        seq.push(EOS_ID);
        for pos in 1..seq.len() {
            for k in 1..=order.min(pos + 1) {
                *raw[k - 1].entry(seq[pos + 1 - k..=pos].to_vec()).or_insert(0) += 1;
            }
        }
    }
    Ok(NgramModel::assemble(order, discount, vocab, index, raw))
}

fn check_params(order: usize, discount: f64) -> Result<()> {
    if !(1..=3).contains(&order) {
        return Err(Error::invalid(format!("n-gram order must be in 1..=3, got {order}")));
    }
    if !(discount > 0.0 && discount < 1.0) {
        return Err(Error::invalid(format!("discount must be in (0, 1), got {discount}")));
    }
    Ok(())
}

fn build_index(vocab: &[String]) -> HashMap<String, u32> {
    vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect()
}

impl NgramModel {
    fn assemble(
        order: usize,
        discount: f64,
        vocab: Vec<String>,
        index: HashMap<String, u32>,
        raw: Vec<BTreeMap<Gram, u64>>,
    ) -> Self {
        let mut levels = Vec::with_capacity(order);
        for m in 1..=order {
            let mut left_neighbours: HashMap<&[u32], u64> = HashMap::new();
            if m < order {
                for gram in raw[m].keys() {
                    *left_neighbours.entry(&gram[1..]).or_insert(0) += 1;
                }
            }
            let mut tables: HashMap<Gram, ContextTable> = HashMap::new();
            for (gram, &count) in &raw[m - 1] {
                let adjusted = if m == order || gram[0] == BOS_ID {
                    count
                } else {
                    left_neighbours.get(gram.as_slice()).copied().unwrap_or(0)
                };
                if adjusted == 0 {
                    continue;
                }
                let table = tables.entry(gram[..m - 1].to_vec()).or_default();
                table.total += adjusted;
                table.counts.insert(gram[m - 1], adjusted);
            }
            levels.push(tables);
        }
        NgramModel {
            order,
            discount,
            vocab,
            index,
            raw,
            levels,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// All tokens the model can assign probability to, reserved ones first.
    pub fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    fn id(&self, token: &str) -> u32 {
        match self.index.get(token) {
            Some(&id) => id,
            None => self.index.get(token.to_lowercase().as_str()).copied().unwrap_or(UNK_ID),
        }
    }

    /// Raw training count of an n-gram, 0 if unseen or longer than the order.
    pub fn raw_count(&self, gram: &[&str]) -> u64 {
        if gram.is_empty() || gram.len() > self.order {
            return 0;
        }
        let ids: Gram = gram.iter().map(|t| self.id(t)).collect();
        self.raw[gram.len() - 1].get(&ids).copied().unwrap_or(0)
    }

    /// `p(word | context)`. Only the last `order - 1` context tokens are used;
    /// a context containing `<s>` is cut at it.
    pub fn prob(&self, context: &[&str], word: &str) -> f64 {
        let ids: Gram = context.iter().map(|t| self.id(t)).collect();
        self.prob_ids(&ids, self.id(word))
    }

    fn prob_ids(&self, context: &[u32], word: u32) -> f64 {
        let mut ctx = &context[context.len().saturating_sub(self.order - 1)..];
        if let Some(bos) = ctx.iter().rposition(|&t| t == BOS_ID) {
            ctx = &ctx[bos..];
        }
        self.level_prob(ctx, word)
    }

    fn level_prob(&self, context: &[u32], word: u32) -> f64 {
        let m = context.len() + 1;
        let lower = if m == 1 {
            1.0 / self.vocab.len() as f64
        } else {
            self.level_prob(&context[1..], word)
        };
        match self.levels[m - 1].get(context) {
            None => lower,
            Some(table) => {
                let total = table.total as f64;
                let count = table.counts.get(&word).copied().unwrap_or(0) as f64;
                let types = table.counts.len() as f64;
                (count - self.discount).max(0.0) / total + self.discount * types / total * lower
            }
        }
    }

    /// Every context with at least one observed continuation, as tokens.
    pub fn contexts(&self) -> Vec<Vec<&str>> {
        let mut out: Vec<Vec<&str>> = self
            .levels
            .iter()
            .flat_map(|level| level.keys())
            .map(|ctx| ctx.iter().map(|&id| self.vocab[id as usize].as_str()).collect())
            .collect();
        out.sort();
        out
    }

    /// Conditional probability of each token of one sentence (excluding `</s>`).
    pub(crate) fn sentence_probs(&self, tokens: &[String]) -> Vec<f64> {
        let mut seq = Vec::with_capacity(tokens.len() + 1);
        seq.push(BOS_ID);
        seq.extend(tokens.iter().map(|t| self.id(t)));
        (1..seq.len()).map(|pos| self.prob_ids(&seq[..pos], seq[pos])).collect()
    }

    pub fn to_dump(&self) -> ModelDump {
        ModelDump {
            format: DUMP_FORMAT.to_string(),
            version: DUMP_VERSION,
            order: self.order,
            discount: self.discount,
            vocab: self.vocab.clone(),
            ngrams: self
                .raw
                .iter()
                .map(|m| m.iter().map(|(g, &c)| (g.clone(), c)).collect())
                .collect(),
        }
    }

    pub fn from_dump(dump: ModelDump) -> Result<Self> {
        if dump.format != DUMP_FORMAT || dump.version != DUMP_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format {} v{}",
                dump.format, dump.version
            )));
        }
        check_params(dump.order, dump.discount)?;
        if dump.vocab.len() < 3 || dump.vocab[..3] != [UNK, BOS, EOS] {
            return Err(Error::invalid("vocabulary must start with <unk>, <s>, </s>"));
        }
        if dump.ngrams.len() != dump.order {
            return Err(Error::invalid("one n-gram table per order is required"));
        }
        let index = build_index(&dump.vocab);
        if index.len() != dump.vocab.len() {
            return Err(Error::invalid("vocabulary contains duplicates"));
        }
        let mut raw = Vec::with_capacity(dump.order);
        for (k, list) in dump.ngrams.into_iter().enumerate() {
            let mut table = BTreeMap::new();
            for (gram, count) in list {
                let in_range = gram.iter().all(|&id| (id as usize) < dump.vocab.len());
                if gram.len() != k + 1 || !in_range || count == 0 {
                    return Err(Error::invalid(format!("bad {}-gram entry {gram:?}", k + 1)));
                }
                if table.insert(gram, count).is_some() {
                    return Err(Error::invalid("duplicate n-gram entry"));
                }
            }
            raw.push(table);
        }
        Ok(NgramModel::assemble(dump.order, dump.discount, dump.vocab, index, raw))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_dump()).expect("model dump serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let dump: ModelDump = serde_json::from_str(json).map_err(|e| Error::parse("model", e.line(), e.to_string()))?;
        NgramModel::from_dump(dump)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        NgramModel::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(texts: &[&str]) -> Vec<Document> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document::new(format!("d{i}"), *t).unwrap())
            .collect()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(train_lm(&[], 2, 0.75), Err(Error::EmptyCorpus)));
        let c = docs(&["a b"]);
        assert!(train_lm(&c, 0, 0.75).is_err());
        assert!(train_lm(&c, 4, 0.75).is_err());
        assert!(train_lm(&c, 2, 0.0).is_err());
        assert!(train_lm(&c, 2, 1.0).is_err());
    }

    #[test]
    fn symmetric_unigram() {
        let m = train_lm(&docs(&["a b", "a b"]), 1, 0.75).unwrap();
        assert_eq!(m.prob(&[], "a"), m.prob(&[], "b"));
    }

    #[test]
    fn unigram_raw_frequency() {
        let m = train_lm(&docs(&["a a a b"]), 1, 0.75).unwrap();
        let real = m.raw_count(&["a"]) + m.raw_count(&["b"]);
        assert_eq!(m.raw_count(&["a"]) as f64 / real as f64, 0.75);
        // counts: a=3, b=1, </s>=1; vocabulary <unk> <s> </s> a b.
        let expected = (3.0 - 0.75) / 5.0 + 0.75 * 3.0 / 5.0 / 5.0;
        assert!((m.prob(&[], "a") - expected).abs() < 1e-12);
    }

    #[test]
    fn trigram_on_tiny_corpus() {
        let m = train_lm(&docs(&["a b"]), 3, 0.75).unwrap();
        assert_eq!(m.raw_count(&[BOS, "a", "b"]), 1);
        assert_eq!(m.raw_count(&["a", "b", EOS]), 1);
        let p = m.prob(&[BOS, "a"], "b");
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn unknown_words_map_to_unk() {
        let m = train_lm(&docs(&["the cat sat."]), 2, 0.75).unwrap();
        assert_eq!(m.prob(&["the"], "zebra"), m.prob(&["the"], UNK));
        assert!(m.prob(&["the"], "zebra") > 0.0);
        assert_eq!(m.prob(&["The"], "CAT"), m.prob(&["the"], "cat"));
    }

    #[test]
    fn dump_round_trip_is_bit_exact() {
        let m = train_lm(&docs(&["The cat sat. The dog ran.", "A cat ran away!"]), 3, 0.6).unwrap();
        let json = m.to_json();
        let back = NgramModel::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
        for ctx in m.contexts() {
            for w in m.vocabulary() {
                assert_eq!(m.prob(&ctx, w).to_bits(), back.prob(&ctx, w).to_bits());
            }
        }
    }

    #[test]
    fn dump_validation() {
        let m = train_lm(&docs(&["a b"]), 2, 0.75).unwrap();
        let mut dump = m.to_dump();
        dump.version = 99;
        assert!(NgramModel::from_dump(dump).is_err());
        let mut dump = m.to_dump();
        dump.ngrams[0].push((vec![999], 1));
        assert!(NgramModel::from_dump(dump).is_err());
        assert!(NgramModel::from_json("{not json").is_err());
    }
}
