//! Corpus-level caption metrics, implemented from their published
//! definitions.
//!
//! Every metric takes an [`EvalCorpus`] of tokenized (candidate, references)
//! items. Corpus means are summed in item-id order, so scores do not depend
//! on the order in which items were supplied.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod bleu;
mod cider;
mod meteor;
mod rouge;
mod tuple;

pub use bleu::{bleu_corpus, bleu_corpus_n};
pub use cider::{cider_d, cider_d_items, CIDER_SIGMA};
pub use meteor::{meteor_item, meteor_lite, MeteorParams};
pub use rouge::{rouge_l, rouge_l_item, ROUGE_BETA};
pub use tuple::{extract_tuples, tuple_f1, TupleF1};

/// Characters split off as standalone tokens.
pub const PUNCTUATION: &[char] = &['.', ',', ';', ':', '!', '?', '-'];

/// Name recorded in reports so the tokenizer choice is auditable.
pub const TOKENIZER_ID: &str = "lowercase+whitespace+punct(.,;:!?-)+dash-normalized";

/// A lowercase token sequence with punctuation isolated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Tokens joined by single spaces.
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }
}

/// Takes pre-split tokens as they are, dropping empty strings.
impl From<Vec<String>> for TokenSeq {
    fn from(tokens: Vec<String>) -> Self {
        TokenSeq(tokens.into_iter().filter(|t| !t.is_empty()).collect())
    }
}

/// Maps the Unicode hyphen and dash family (U+2010..U+2015) and the minus
/// sign onto ASCII `-`.
pub fn normalize_dashes(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            '\u{2010}'..='\u{2015}' | '\u{2212}' => '-',
            other => other,
        })
        .collect()
}

/// Lowercases, normalizes dashes, splits on whitespace and isolates each of
/// [`PUNCTUATION`].
pub fn tokenize(text: &str) -> TokenSeq {
    let text = normalize_dashes(&text.to_lowercase());
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        let mut current = String::new();
        for c in word.chars() {
            if PUNCTUATION.contains(&c) {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            } else {
                current.push(c);
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
    }
    TokenSeq(tokens)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalItem {
    pub id: String,
    pub candidate: TokenSeq,
    pub references: Vec<TokenSeq>,
}

impl EvalItem {
    /// Single-reference item from raw text.
    pub fn from_text(id: impl Into<String>, candidate: &str, reference: &str) -> Self {
        EvalItem {
            id: id.into(),
            candidate: tokenize(candidate),
            references: vec![tokenize(reference)],
        }
    }
}

/// Items with unique ids and at least one reference each.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalCorpus {
    items: Vec<EvalItem>,
}

impl EvalCorpus {
    pub fn new(items: Vec<EvalItem>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for item in &items {
            if !seen.insert(item.id.as_str()) {
                return Err(Error::invalid(format!("duplicate corpus id {}", item.id)));
            }
            if item.references.is_empty() {
                return Err(Error::invalid(format!("{}: no reference", item.id)));
            }
        }
        Ok(EvalCorpus { items })
    }

    /// `(id, candidate, reference)` text triples.
    pub fn from_texts<'a>(triples: impl IntoIterator<Item = (&'a str, &'a str, &'a str)>) -> Result<Self> {
        EvalCorpus::new(
            triples
                .into_iter()
                .map(|(id, c, r)| EvalItem::from_text(id, c, r))
                .collect(),
        )
    }

    pub fn items(&self) -> &[EvalItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn require_non_empty(&self, metric: &str) -> Result<()> {
        if self.items.is_empty() {
            Err(Error::invalid(format!("{metric}: empty corpus")))
        } else {
            Ok(())
        }
    }
}

/// Counts of every `n`-gram of `tokens`.
pub(crate) fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], u32> {
    let mut counts = BTreeMap::new();
    if n > 0 && tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Mean of per-item scores, summed in id order.
pub(crate) fn mean_by_id(items: &[EvalItem], scores: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[a].id.cmp(&items[b].id));
    let sum: f64 = order.iter().map(|&i| scores[i]).sum();
    sum / items.len() as f64
}
