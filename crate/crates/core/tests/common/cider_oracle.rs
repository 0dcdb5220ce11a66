//! Brute-force CIDEr-D used as a test oracle.
//!
//! Deliberately shares no code with the library: n-grams are space-joined
//! strings, vectors are dense over an explicit vocabulary, and every sum is
//! written out as a loop over that vocabulary.

const SIGMA: f64 = 6.0;

fn grams(tokens: &[String], n: usize) -> Vec<String> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| tokens[i..i + n].join(" ")).collect()
}

fn count(list: &[String], key: &str) -> f64 {
    list.iter().filter(|g| g.as_str() == key).count() as f64
}

/// `items[i] = (candidate tokens, reference token lists)`.
pub fn cider_d_oracle(items: &[(Vec<String>, Vec<Vec<String>>)]) -> Option<f64> {
    let n_items = items.len();
    if n_items < 2 {
        return None;
    }
    let mut per_item = Vec::new();
    for (cand, refs) in items {
        let mut ref_sum = 0.0;
        for reference in refs {
            let mut order_scores = Vec::new();
            for n in 1..=4 {
                let rg = grams(reference, n);
                if rg.is_empty() {
                    continue;
                }
                let cg = grams(cand, n);
                let mut vocab: Vec<String> = rg.iter().chain(cg.iter()).cloned().collect();
                vocab.sort();
                vocab.dedup();
                // document frequency: items whose references contain the gram
                let idf: Vec<f64> = vocab
                    .iter()
                    .map(|g| {
                        let df = items
                            .iter()
                            .filter(|(_, rs)| rs.iter().any(|r| grams(r, n).contains(g)))
                            .count();
                        (n_items as f64 / (1.0 + df as f64)).ln()
                    })
                    .collect();
                let tc: Vec<f64> = vocab.iter().map(|g| count(&cg, g)).collect();
                let tr: Vec<f64> = vocab.iter().map(|g| count(&rg, g)).collect();
                let mut dot = 0.0;
                let mut nc = 0.0;
                let mut nr = 0.0;
                for k in 0..vocab.len() {
                    let w2 = idf[k] * idf[k];
                    dot += tc[k].min(tr[k]) * tr[k] * w2;
                    nc += tc[k] * tc[k] * w2;
                    nr += tr[k] * tr[k] * w2;
                }
                let sim = if nr == 0.0 {
                    if tc == tr { 1.0 } else { 0.0 }
                } else if nc == 0.0 {
                    0.0
                } else {
                    dot / (nc.sqrt() * nr.sqrt())
                };
                let delta = cand.len() as f64 - reference.len() as f64;
                let penalty = (-(delta * delta) / (2.0 * SIGMA * SIGMA)).exp();
                order_scores.push(10.0 * penalty * sim);
            }
            if !order_scores.is_empty() {
                ref_sum += order_scores.iter().sum::<f64>() / order_scores.len() as f64;
            }
        }
        per_item.push(ref_sum / refs.len() as f64);
    }
    let total: f64 = per_item.iter().sum();
    Some(total / n_items as f64)
}

/// Lowercase whitespace-and-punctuation tokenizer, reimplemented for the oracle.
pub fn oracle_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for ch in text.to_lowercase().chars() {
        let ch = if ('\u{2010}'..='\u{2015}').contains(&ch) || ch == '\u{2212}' { '-' } else { ch };
        if ch.is_whitespace() || ".,;:!?-".contains(ch) {
            if !word.is_empty() {
                out.push(std::mem::take(&mut word));
            }
            if !ch.is_whitespace() {
                out.push(ch.to_string());
            }
        } else {
            word.push(ch);
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}
