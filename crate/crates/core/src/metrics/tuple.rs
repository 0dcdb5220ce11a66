use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{mean_by_id, EvalCorpus, EvalItem};
use crate::characteristic::Characteristic;
use crate::forge::PhraseLexicon;

/// Corpus tuple-F1 and how many items it covered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TupleF1 {
    /// `None` when every item was skipped.
    pub f1: Option<f64>,
    pub evaluated: usize,
    /// Items whose reference yields no tuple.
    pub skipped: usize,
}

/// `(characteristic, score)` tuples named by lexicon phrases in `tokens`.
pub fn extract_tuples(tokens: &[String], lexicon: &PhraseLexicon) -> BTreeSet<(Characteristic, u8)> {
    lexicon
        .find_phrases(tokens)
        .into_iter()
        .map(|m| (m.characteristic, m.score))
        .collect()
}

/// Mean F1 between candidate and reference tuple sets. Items with several
/// references use the union of their reference tuples.
pub fn tuple_f1(corpus: &EvalCorpus, lexicon: &PhraseLexicon) -> TupleF1 {
    let mut kept: Vec<EvalItem> = Vec::new();
    let mut scores = Vec::new();
    let mut skipped = 0;
    for item in corpus.items() {
        let reference: BTreeSet<_> = item
            .references
            .iter()
            .flat_map(|r| extract_tuples(r.tokens(), lexicon))
            .collect();
        if reference.is_empty() {
            skipped += 1;
            continue;
        }
        let cand = extract_tuples(item.candidate.tokens(), lexicon);
        let hits = cand.intersection(&reference).count();
        scores.push(2.0 * hits as f64 / (cand.len() + reference.len()) as f64);
        kept.push(item.clone());
    }
    TupleF1 {
        f1: (!kept.is_empty()).then(|| mean_by_id(&kept, &scores)),
        evaluated: kept.len(),
        skipped,
    }
}
