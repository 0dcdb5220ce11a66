use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{mean_by_id, ngram_counts, EvalCorpus};
use crate::error::{Error, Result};

/// Gaussian length-penalty width, in tokens.
pub const CIDER_SIGMA: f64 = 6.0;
const MAX_N: usize = 4;

type DocFreq<'a> = Vec<BTreeMap<&'a [String], u32>>;

/// Corpus CIDEr-D on the 0..10 scale.
///
/// Per order `n`, n-grams are weighted `tf * ln(|corpus| / (1 + df))`, with
/// `df` counted over item references. The clipped cosine uses
/// `sum min(tf_c, tf_r) * tf_r * idf^2` as numerator, so a candidate cannot
/// gain by repeating n-grams. Orders for which the reference has no n-grams
/// are left out of the per-item mean.
pub fn cider_d(corpus: &EvalCorpus) -> Result<f64> {
    let scores = cider_d_items(corpus)?;
    Ok(mean_by_id(corpus.items(), &scores))
}

/// Per-item CIDEr-D, in corpus order.
pub fn cider_d_items(corpus: &EvalCorpus) -> Result<Vec<f64>> {
    let n_items = corpus.len();
    if n_items < 2 {
        return Err(Error::invalid("CIDEr-D: IDF undefined for a corpus of fewer than 2 items"));
    }
    let mut df: DocFreq = vec![BTreeMap::new(); MAX_N + 1];
    for item in corpus.items() {
        for (n, table) in df.iter_mut().enumerate().skip(1) {
            let mut grams: Vec<&[String]> = item
                .references
                .iter()
                .flat_map(|r| r.tokens().windows(n))
                .collect();
            grams.sort();
            grams.dedup();
            for g in grams {
                *table.entry(g).or_insert(0) += 1;
            }
        }
    }
    let corpus_size = n_items as f64;
    let idf = |n: usize, gram: &[String]| -> f64 {
        let d = df[n].get(gram).copied().unwrap_or(0);
        (corpus_size / (1.0 + f64::from(d))).ln()
    };

    Ok(corpus
        .items()
        .par_iter()
        .map(|item| {
            let cand = item.candidate.tokens();
            let mut sum = 0.0;
            for reference in &item.references {
                let reference = reference.tokens();
                let delta = cand.len() as f64 - reference.len() as f64;
                let penalty = (-(delta * delta) / (2.0 * CIDER_SIGMA * CIDER_SIGMA)).exp();
                let mut order_sum = 0.0;
                let mut orders = 0;
                for n in 1..=MAX_N {
                    let rc = ngram_counts(reference, n);
                    if rc.is_empty() {
                        continue;
                    }
                    let cc = ngram_counts(cand, n);
                    orders += 1;
                    order_sum += 10.0 * penalty * clipped_cosine(&cc, &rc, |g| idf(n, g));
                }
                if orders > 0 {
                    sum += order_sum / f64::from(orders);
                }
            }
            sum / item.references.len() as f64
        })
        .collect())
}

fn clipped_cosine<'a>(
    cand: &BTreeMap<&'a [String], u32>,
    reference: &BTreeMap<&'a [String], u32>,
    idf: impl Fn(&[String]) -> f64,
) -> f64 {
    let mut dot = 0.0;
    let mut norm_r = 0.0;
    for (g, &tr) in reference {
        let w2 = idf(g).powi(2);
        let tr = f64::from(tr);
        norm_r += tr * tr * w2;
        if let Some(&tc) = cand.get(g) {
            dot += f64::from(tc).min(tr) * tr * w2;
        }
    }
    let norm_c: f64 = cand
        .iter()
        .map(|(g, &tc)| f64::from(tc).powi(2) * idf(g).powi(2))
        .sum();
    if norm_r == 0.0 {
        // every reference gram has zero weight; only an exact bag match counts
        return if cand == reference { 1.0 } else { 0.0 };
    }
    if norm_c == 0.0 {
        return 0.0;
    }
    dot / (norm_c.sqrt() * norm_r.sqrt())
}
