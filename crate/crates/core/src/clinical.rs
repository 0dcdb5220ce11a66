//! Score agreement between generated and reference findings.
//!
//! Scores are read back out of text by longest-match lexicon lookup, then
//! compared as mean absolute error and `consistency = 1 - MAE / d_max`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::characteristic::{Category, Characteristic};
use crate::error::{Error, Result};
use crate::forge::PhraseLexicon;
use crate::metrics::tokenize;

/// Score range width of the headline characteristics.
pub const HEADLINE_D_MAX: f64 = 4.0;

/// Scores recovered from one text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtractedScores {
    pub scores: BTreeMap<Characteristic, u8>,
    /// Characteristics named with two different scores; never in `scores`.
    pub ambiguous: BTreeSet<Characteristic>,
}

impl ExtractedScores {
    pub fn get(&self, c: Characteristic) -> Option<u8> {
        self.scores.get(&c).copied()
    }
}

/// Tokenizes `text` (so spaced and Unicode dashes match plain hyphens) and
/// collects the score of every lexicon phrase found.
pub fn extract_scores(text: &str, lexicon: &PhraseLexicon) -> ExtractedScores {
    let tokens = tokenize(text);
    let mut found: BTreeMap<Characteristic, BTreeSet<u8>> = BTreeMap::new();
    for m in lexicon.find_phrases(tokens.tokens()) {
        found.entry(m.characteristic).or_default().insert(m.score);
    }
    let mut out = ExtractedScores::default();
    for (c, scores) in found {
        if scores.len() == 1 {
            out.scores.insert(c, *scores.first().expect("non-empty"));
        } else {
            out.ambiguous.insert(c);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorePair {
    pub nodule_id: String,
    pub characteristic: Characteristic,
    pub reference_score: u8,
    pub predicted_score: u8,
}

impl ScorePair {
    pub fn abs_error(&self) -> u32 {
        u32::from(self.reference_score.abs_diff(self.predicted_score))
    }
}

/// Mean absolute score difference.
pub fn mae(pairs: &[ScorePair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::invalid("no evaluable pairs"));
    }
    let total: u64 = pairs.iter().map(|p| u64::from(p.abs_error())).sum();
    Ok(total as f64 / pairs.len() as f64)
}

/// `1 - MAE / d_max`.
pub fn consistency(pairs: &[ScorePair], d_max: f64) -> Result<f64> {
    if d_max.is_nan() || d_max <= 0.0 {
        return Err(Error::invalid("d_max must be positive"));
    }
    Ok(1.0 - mae(pairs)? / d_max)
}

/// What to do when a prediction names no (or an ambiguous) score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Leave the item out of N and count it as skipped.
    #[default]
    Skip,
    /// Score it as the legal value farthest from the reference.
    WorstCase,
}

/// Which answers a score is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnswerPath {
    /// The overall finding sentence.
    Overall,
    /// The answer to the characteristic's own question.
    PerQuestion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicAgreement {
    pub characteristic: Characteristic,
    pub n: usize,
    pub skipped: usize,
    pub imputed: usize,
    /// `None` when no item could be scored.
    pub mae: Option<f64>,
    pub consistency: Option<f64>,
    pub d_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub path: AnswerPath,
    pub policy: MissingPolicy,
    /// Sphericity, margin and texture with `d_max = 4`.
    pub headline: Vec<CharacteristicAgreement>,
    /// Spiculation, lobulation and calcification, each with its own range.
    pub secondary: Vec<CharacteristicAgreement>,
}

impl AgreementReport {
    pub fn get(&self, c: Characteristic) -> Option<&CharacteristicAgreement> {
        self.headline.iter().chain(&self.secondary).find(|a| a.characteristic == c)
    }
}

/// One reference answer and the generated answer to the same question.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerPair<'a> {
    pub nodule_id: &'a str,
    pub category: Category,
    pub reference: &'a str,
    pub prediction: &'a str,
}

fn score_from(
    text: &str,
    c: Characteristic,
    path: AnswerPath,
    lexicon: &PhraseLexicon,
) -> Option<u8> {
    let extracted = extract_scores(text, lexicon);
    if extracted.ambiguous.contains(&c) {
        return None;
    }
    match extracted.get(c) {
        Some(s) => Some(s),
        // a gated clause is left out exactly when the score is at its absence level
        None if path == AnswerPath::Overall && lexicon.clause_template(c).is_some() => {
            lexicon.absent_level(c)
        }
        None => None,
    }
}

fn worst_case(c: Characteristic, reference: u8) -> u8 {
    if reference > c.max_score() - reference {
        1
    } else {
        c.max_score()
    }
}

/// Score pairs for `c` along `path`, plus skip and imputation counts.
/// Items whose reference yields no score are skipped whatever the policy.
pub fn score_pairs(
    answers: &[AnswerPair<'_>],
    c: Characteristic,
    path: AnswerPath,
    lexicon: &PhraseLexicon,
    policy: MissingPolicy,
) -> (Vec<ScorePair>, usize, usize) {
    let wanted = match path {
        AnswerPath::Overall => Category::Overall,
        AnswerPath::PerQuestion => Category::from(c),
    };
    let mut pairs = Vec::new();
    let mut skipped = 0;
    let mut imputed = 0;
    for a in answers.iter().filter(|a| a.category == wanted) {
        let Some(reference) = score_from(a.reference, c, path, lexicon) else {
            skipped += 1;
            continue;
        };
        let predicted = match (score_from(a.prediction, c, path, lexicon), policy) {
            (Some(p), _) => p,
            (None, MissingPolicy::Skip) => {
                skipped += 1;
                continue;
            }
            (None, MissingPolicy::WorstCase) => {
                imputed += 1;
                worst_case(c, reference)
            }
        };
        pairs.push(ScorePair {
            nodule_id: a.nodule_id.to_string(),
            characteristic: c,
            reference_score: reference,
            predicted_score: predicted,
        });
    }
    (pairs, skipped, imputed)
}

/// Agreement for every characteristic along one answer path.
pub fn agreement(
    answers: &[AnswerPair<'_>],
    path: AnswerPath,
    lexicon: &PhraseLexicon,
    policy: MissingPolicy,
) -> AgreementReport {
    let block = |c: Characteristic, d_max: f64| {
        let (pairs, skipped, imputed) = score_pairs(answers, c, path, lexicon, policy);
        CharacteristicAgreement {
            characteristic: c,
            n: pairs.len(),
            skipped,
            imputed,
            mae: mae(&pairs).ok(),
            consistency: consistency(&pairs, d_max).ok(),
            d_max,
        }
    };
    AgreementReport {
        path,
        policy,
        headline: Characteristic::HEADLINE
            .iter()
            .map(|&c| block(c, HEADLINE_D_MAX))
            .collect(),
        secondary: Characteristic::SECONDARY
            .iter()
            .map(|&c| block(c, f64::from(c.d_max())))
            .collect(),
    }
}
