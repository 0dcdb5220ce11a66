//! Reference generators that need no trained model: an echo of the ground
//! truth, a training-set prior, and seeded score corruption.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::characteristic::{Category, Characteristic, CharacteristicProfile};
use crate::error::{Error, Result};
use crate::forge::{compose_finding, DatasetRecord, PhraseLexicon};
use crate::rng::SplitMix64;

/// A `predictions.jsonl` line.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub nodule_id: String,
    pub category: Category,
    pub generated_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Echo,
    Majority,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub kind: GeneratorKind,
    /// Per-score replacement probability; noisy only.
    pub corruption_rate: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.corruption_rate) {
            return Err(Error::invalid(format!(
                "corruption rate {} is outside [0, 1]",
                self.corruption_rate
            )));
        }
        Ok(())
    }
}

/// Recovers each nodule's profile from its per-characteristic answers.
pub fn profiles_from_records(
    records: &[DatasetRecord],
    lexicon: &PhraseLexicon,
) -> Result<BTreeMap<String, CharacteristicProfile>> {
    let mut partial: BTreeMap<&str, BTreeMap<Characteristic, u8>> = BTreeMap::new();
    for r in records {
        let entry = partial.entry(&r.nodule_id).or_default();
        let Some(c) = r.category.characteristic() else {
            continue;
        };
        let score = lexicon.score_for(c, &r.answer).ok_or_else(|| {
            Error::invalid(format!("{}: {c} answer `{}` is not a lexicon phrase", r.nodule_id, r.answer))
        })?;
        entry.insert(c, score);
    }
    partial
        .into_iter()
        .map(|(id, scores)| {
            for c in Characteristic::ALL {
                if !scores.contains_key(&c) {
                    return Err(Error::MissingCharacteristic {
                        nodule: id.to_string(),
                        field: c.name().to_string(),
                    });
                }
            }
            let profile = CharacteristicProfile::try_from_fn(|c| i64::from(scores[&c]))?;
            Ok((id.to_string(), profile))
        })
        .collect()
}

/// The seven answers for `profile`, sorted by category.
fn render_profile(nodule_id: &str, profile: &CharacteristicProfile, lexicon: &PhraseLexicon) -> Vec<PredictionRecord> {
    Category::ALL
        .iter()
        .map(|&category| PredictionRecord {
            nodule_id: nodule_id.to_string(),
            category,
            generated_text: match category.characteristic() {
                None => compose_finding(profile, lexicon),
                Some(c) => lexicon.phrase(c, profile.get(c)).to_string(),
            },
        })
        .collect()
}

/// The reference answer as the prediction, for every item.
pub fn echo_generate(eval: &[DatasetRecord]) -> Vec<PredictionRecord> {
    let mut out: Vec<PredictionRecord> = eval
        .iter()
        .map(|r| PredictionRecord {
            nodule_id: r.nodule_id.clone(),
            category: r.category,
            generated_text: r.answer.clone(),
        })
        .collect();
    out.sort();
    out
}

/// Per characteristic, the most frequent training score (lower on ties).
pub fn modal_profile(train: &BTreeMap<String, CharacteristicProfile>) -> Result<CharacteristicProfile> {
    if train.is_empty() {
        return Err(Error::invalid("majority baseline needs a non-empty train split"));
    }
    CharacteristicProfile::try_from_fn(|c| {
        let mut counts = vec![0usize; c.max_score() as usize + 1];
        for p in train.values() {
            counts[p.get(c) as usize] += 1;
        }
        // max_by_key keeps the last maximum, so scan from the top
        (1..=c.max_score() as usize)
            .rev()
            .max_by_key(|&s| counts[s])
            .expect("non-empty range") as i64
    })
}

/// Every eval nodule answered from the modal training profile.
pub fn majority_generate(
    train: &[DatasetRecord],
    eval: &[DatasetRecord],
    lexicon: &PhraseLexicon,
) -> Result<Vec<PredictionRecord>> {
    let modal = modal_profile(&profiles_from_records(train, lexicon)?)?;
    let mut out = Vec::new();
    for id in nodule_ids(eval) {
        out.extend(render_profile(id, &modal, lexicon));
    }
    Ok(answer_only_present(out, eval))
}

/// Replaces each score with probability `rate` by a uniform draw over the
/// other legal scores, then renders answers from the corrupted profile.
///
/// Draws come from a [`SplitMix64`] stream keyed by `(seed, nodule id,
/// characteristic)`: first `next_f64() < rate` decides corruption, then
/// `below(max_score - 1)` picks among the remaining scores in ascending order.
pub fn corrupt_profile(profile: &CharacteristicProfile, nodule_id: &str, rate: f64, seed: u64) -> CharacteristicProfile {
    let mut out = *profile;
    for c in Characteristic::ALL {
        let mut rng = SplitMix64::for_stream(seed, &[nodule_id, c.name()]);
        if rng.next_f64() < rate {
            let truth = profile.get(c);
            let k = rng.below(u64::from(c.max_score()) - 1) as u8 + 1;
            let replacement = if k >= truth { k + 1 } else { k };
            out = out.with(c, replacement);
        }
    }
    out
}

pub fn noisy_generate(
    eval: &[DatasetRecord],
    rate: f64,
    seed: u64,
    lexicon: &PhraseLexicon,
) -> Result<Vec<PredictionRecord>> {
    GeneratorConfig {
        kind: GeneratorKind::Noisy,
        corruption_rate: rate,
        seed,
    }
    .validate()?;
    let profiles = profiles_from_records(eval, lexicon)?;
    let mut out = Vec::new();
    for (id, profile) in &profiles {
        out.extend(render_profile(id, &corrupt_profile(profile, id, rate, seed), lexicon));
    }
    Ok(answer_only_present(out, eval))
}

/// Runs the configured generator. `train` is only read by the majority kind.
pub fn generate(
    config: &GeneratorConfig,
    train: &[DatasetRecord],
    eval: &[DatasetRecord],
    lexicon: &PhraseLexicon,
) -> Result<Vec<PredictionRecord>> {
    config.validate()?;
    match config.kind {
        GeneratorKind::Echo => Ok(echo_generate(eval)),
        GeneratorKind::Majority => majority_generate(train, eval, lexicon),
        GeneratorKind::Noisy => noisy_generate(eval, config.corruption_rate, config.seed, lexicon),
    }
}

fn nodule_ids(records: &[DatasetRecord]) -> Vec<&str> {
    let mut ids: Vec<&str> = records.iter().map(|r| r.nodule_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Keeps predictions for (nodule, category) pairs that exist in `eval`.
fn answer_only_present(mut preds: Vec<PredictionRecord>, eval: &[DatasetRecord]) -> Vec<PredictionRecord> {
    let wanted: std::collections::BTreeSet<(&str, Category)> =
        eval.iter().map(|r| (r.nodule_id.as_str(), r.category)).collect();
    preds.retain(|p| wanted.contains(&(p.nodule_id.as_str(), p.category)));
    preds.sort();
    preds
}
