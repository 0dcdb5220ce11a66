use super::{ngram_counts, EvalCorpus};
use crate::error::{Error, Result};

/// Cumulative corpus BLEU-1..4.
pub fn bleu_corpus(corpus: &EvalCorpus) -> Result<[f64; 4]> {
    let v = bleu_corpus_n(corpus, 4)?;
    Ok([v[0], v[1], v[2], v[3]])
}

/// Cumulative corpus BLEU-1..`max_n`.
///
/// Clipped n-gram matches and candidate n-gram totals are summed over the
/// corpus before dividing. An order with no n-grams in either the candidates
/// or the references is vacuous (`p_n = 1`); returning 0 there would make
/// short-answer corpora fail the identity check. The brevity penalty uses
/// the total candidate length and, per item, the closest reference length
/// (shorter on ties).
pub fn bleu_corpus_n(corpus: &EvalCorpus, max_n: usize) -> Result<Vec<f64>> {
    corpus.require_non_empty("BLEU")?;
    if max_n == 0 {
        return Err(Error::invalid("BLEU: max_n must be at least 1"));
    }
    let mut matches = vec![0u64; max_n + 1];
    let mut totals = vec![0u64; max_n + 1];
    let mut ref_totals = vec![0u64; max_n + 1];
    let mut cand_len = 0u64;
    let mut ref_len = 0u64;

    for item in corpus.items() {
        let cand = item.candidate.tokens();
        cand_len += cand.len() as u64;
        ref_len += item
            .references
            .iter()
            .map(|r| r.len())
            .min_by_key(|&l| (l.abs_diff(cand.len()), l))
            .unwrap_or(0) as u64;
        for n in 1..=max_n {
            let cc = ngram_counts(cand, n);
            let refs: Vec<_> = item.references.iter().map(|r| ngram_counts(r.tokens(), n)).collect();
            totals[n] += cand.len().saturating_sub(n - 1) as u64;
            ref_totals[n] += item
                .references
                .iter()
                .map(|r| r.len().saturating_sub(n - 1))
                .max()
                .unwrap_or(0) as u64;
            for (g, &c) in &cc {
                let max_ref = refs.iter().map(|r| r.get(g).copied().unwrap_or(0)).max().unwrap_or(0);
                matches[n] += u64::from(c.min(max_ref));
            }
        }
    }

    let bp = if cand_len > ref_len {
        1.0
    } else if cand_len == 0 {
        if ref_len == 0 { 1.0 } else { 0.0 }
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };

    let mut out = Vec::with_capacity(max_n);
    let mut log_sum = 0.0;
    let mut zero = false;
    for n in 1..=max_n {
        if totals[n] == 0 {
            if ref_totals[n] > 0 {
                zero = true;
            }
        } else if matches[n] == 0 {
            zero = true;
        } else {
            log_sum += (matches[n] as f64 / totals[n] as f64).ln();
        }
        out.push(if zero { 0.0 } else { bp * (log_sum / n as f64).exp() });
    }
    Ok(out)
}
