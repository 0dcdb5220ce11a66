use super::{mean_by_id, EvalCorpus};
use crate::error::Result;

/// Recall weight of the LCS F-measure.
pub const ROUGE_BETA: f64 = 1.2;

/// Mean ROUGE-L over items; with several references, the best one counts.
pub fn rouge_l(corpus: &EvalCorpus) -> Result<f64> {
    corpus.require_non_empty("ROUGE-L")?;
    let scores: Vec<f64> = corpus
        .items()
        .iter()
        .map(|item| {
            item.references
                .iter()
                .map(|r| rouge_l_item(item.candidate.tokens(), r.tokens()))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(mean_by_id(corpus.items(), &scores))
}

pub fn rouge_l_item(cand: &[String], reference: &[String]) -> f64 {
    let lcs = lcs_len(cand, reference);
    if lcs == 0 {
        return 0.0;
    }
    let p = lcs as f64 / cand.len() as f64;
    let r = lcs as f64 / reference.len() as f64;
    let b2 = ROUGE_BETA * ROUGE_BETA;
    (1.0 + b2) * p * r / (r + b2 * p)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}
