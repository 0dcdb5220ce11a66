use serde::{Deserialize, Serialize};

use super::PhraseLexicon;
use crate::characteristic::{Category, Characteristic, CharacteristicProfile};

/// One question/answer pair about one nodule image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VqaItem {
    pub nodule_id: String,
    pub image_path: String,
    pub category: Category,
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitLabel {
    Train,
    Val,
    Test,
}

impl SplitLabel {
    pub fn name(self) -> &'static str {
        match self {
            SplitLabel::Train => "train",
            SplitLabel::Val => "val",
            SplitLabel::Test => "test",
        }
    }
}

/// A `dataset.jsonl` line: a [`VqaItem`] plus its split, `null` until assigned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub nodule_id: String,
    pub image_path: String,
    pub category: Category,
    pub question: String,
    pub answer: String,
    pub split: Option<SplitLabel>,
}

impl From<VqaItem> for DatasetRecord {
    fn from(item: VqaItem) -> Self {
        DatasetRecord {
            nodule_id: item.nodule_id,
            image_path: item.image_path,
            category: item.category,
            question: item.question,
            answer: item.answer,
            split: None,
        }
    }
}

fn render(template: &str, profile: &CharacteristicProfile, lexicon: &PhraseLexicon) -> String {
    let mut out = template.to_string();
    for c in Characteristic::ALL {
        let key = format!("{{{}}}", c.name());
        if out.contains(&key) {
            out = out.replace(&key, lexicon.phrase(c, profile.get(c)));
        }
    }
    out
}

/// The overall finding: the core sentence, then one clause for each
/// characteristic whose score differs from its absence level.
pub fn compose_finding(profile: &CharacteristicProfile, lexicon: &PhraseLexicon) -> String {
    let mut text = render(lexicon.core_template(), profile, lexicon);
    for c in Characteristic::SECONDARY {
        let Some(template) = lexicon.clause_template(c) else {
            continue;
        };
        if lexicon.absent_level(c) == Some(profile.get(c)) {
            continue;
        }
        text.push(' ');
        text.push_str(&render(template, profile, lexicon));
    }
    text
}

/// The seven items of one nodule, in [`Category::ALL`] order.
pub fn qa_pairs(
    nodule_id: &str,
    image_path: &str,
    profile: &CharacteristicProfile,
    lexicon: &PhraseLexicon,
) -> Vec<VqaItem> {
    Category::ALL
        .iter()
        .map(|&category| {
            let answer = match category.characteristic() {
                None => compose_finding(profile, lexicon),
                Some(c) => lexicon.phrase(c, profile.get(c)).to_string(),
            };
            VqaItem {
                nodule_id: nodule_id.to_string(),
                image_path: image_path.to_string(),
                category,
                question: category.question().to_string(),
                answer,
            }
        })
        .collect()
}
