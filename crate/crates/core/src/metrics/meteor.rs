use rust_stemmers::{Algorithm, Stemmer};

use super::{mean_by_id, EvalCorpus};
use crate::error::Result;

/// Scoring parameters; the defaults are the standard METEOR values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeteorParams {
    /// Precision weight in the harmonic mean.
    pub alpha: f64,
    /// Fragmentation penalty exponent.
    pub beta: f64,
    /// Maximum fragmentation penalty.
    pub gamma: f64,
}

impl Default for MeteorParams {
    fn default() -> Self {
        MeteorParams {
            alpha: 0.9,
            beta: 3.0,
            gamma: 0.5,
        }
    }
}

/// Mean METEOR-lite over items (exact and Snowball-stem stages, no synonym
/// tables); with several references, the best one counts.
pub fn meteor_lite(corpus: &EvalCorpus) -> Result<f64> {
    corpus.require_non_empty("METEOR")?;
    let stemmer = Stemmer::create(Algorithm::English);
    let params = MeteorParams::default();
    let scores: Vec<f64> = corpus
        .items()
        .iter()
        .map(|item| {
            item.references
                .iter()
                .map(|r| score_with(&stemmer, params, item.candidate.tokens(), r.tokens()))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(mean_by_id(corpus.items(), &scores))
}

/// METEOR-lite for one candidate/reference pair.
pub fn meteor_item(cand: &[String], reference: &[String], params: MeteorParams) -> f64 {
    score_with(&Stemmer::create(Algorithm::English), params, cand, reference)
}

fn score_with(stemmer: &Stemmer, params: MeteorParams, cand: &[String], reference: &[String]) -> f64 {
    let alignment = align(stemmer, cand, reference);
    let m = alignment.len();
    if m == 0 {
        return 0.0;
    }
    let p = m as f64 / cand.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let f_mean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
    let chunks = count_chunks(&alignment);
    let penalty = params.gamma * (chunks as f64 / m as f64).powf(params.beta);
    f_mean * (1.0 - penalty)
}

/// Greedy one-to-one alignment, exact stage first, then stems. Each
/// candidate token, left to right, takes the free reference position right
/// after the previous match when it fits, else the earliest fitting one.
/// Returns `(candidate index, reference index)` pairs sorted by candidate.
fn align(stemmer: &Stemmer, cand: &[String], reference: &[String]) -> Vec<(usize, usize)> {
    let mut ref_used = vec![false; reference.len()];
    let mut cand_used = vec![false; cand.len()];
    let mut pairs = Vec::new();

    let cand_stems: Vec<String> = cand.iter().map(|t| stemmer.stem(t).into_owned()).collect();
    let ref_stems: Vec<String> = reference.iter().map(|t| stemmer.stem(t).into_owned()).collect();
    let stages: [(&[String], &[String]); 2] = [(cand, reference), (&cand_stems, &ref_stems)];

    for (c_keys, r_keys) in stages {
        let mut last: Option<usize> = None;
        for (i, key) in c_keys.iter().enumerate() {
            if cand_used[i] {
                last = pairs.iter().find(|&&(ci, _)| ci == i).map(|&(_, rj)| rj);
                continue;
            }
            let fits = |j: usize| !ref_used[j] && r_keys[j] == *key;
            let next = last.map(|l| l + 1).filter(|&j| j < r_keys.len() && fits(j));
            if let Some(j) = next.or_else(|| (0..r_keys.len()).find(|&j| fits(j))) {
                ref_used[j] = true;
                cand_used[i] = true;
                pairs.push((i, j));
                last = Some(j);
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Runs that are contiguous in both candidate and reference.
fn count_chunks(alignment: &[(usize, usize)]) -> usize {
    let mut chunks = 0;
    let mut prev: Option<(usize, usize)> = None;
    for &(i, j) in alignment {
        match prev {
            Some((pi, pj)) if i == pi + 1 && j == pj + 1 => {}
            _ => chunks += 1,
        }
        prev = Some((i, j));
    }
    chunks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::tokenize;

    fn score(c: &str, r: &str) -> f64 {
        meteor_item(tokenize(c).tokens(), tokenize(r).tokens(), MeteorParams::default())
    }

    #[test]
    fn substitution_values() {
        assert!((score("a b c d", "a b c d") - (1.0 - 0.5 * 0.25f64.powi(3))).abs() < 1e-9);
        assert_eq!(score("a b", "c d"), 0.0);
        assert!((score("solid", "solid") - 0.5).abs() < 1e-9);
    }

    #[test]
    fn stem_stage_matches_inflections() {
        // "margins" and "margin" share a stem
        assert!((score("margins", "margin") - 0.5).abs() < 1e-9);
    }

    #[test]
    fn swapped_order_fragments() {
        // a-b aligned in two chunks after a swap
        let s = score("b a", "a b");
        let expected = 1.0 - 0.5 * 1.0f64.powi(3);
        assert!((s - expected).abs() < 1e-9);
    }

    #[test]
    fn prefers_adjacent_position() {
        let stemmer = Stemmer::create(Algorithm::English);
        let c = tokenize("the y the").into_tokens();
        let r = tokenize("the x the y the").into_tokens();
        assert_eq!(align(&stemmer, &c, &r), vec![(0, 0), (1, 3), (2, 4)]);
    }
}
