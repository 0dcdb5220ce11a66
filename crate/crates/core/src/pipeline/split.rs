use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{dataset_lexicon, read_dataset, write_jsonl, RunManifest, DATASET_FILE};
use crate::error::{Error, Result};
use crate::forge::{split_dataset, SplitLabel, SplitMode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub seed: u64,
    pub mode: SplitMode,
    /// Nodules per split.
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl fmt::Display for SplitSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} split, seed {}: train {} / val {} / test {} nodules",
            self.mode.name(),
            self.seed,
            self.train,
            self.val,
            self.test
        )
    }
}

/// Assigns every nodule of the dataset in `dir` to train/val/test, rewriting
/// `dataset.jsonl` in place and recording the split in `manifest.json`.
pub fn cmd_split(dir: &Path, seed: u64, mode: SplitMode) -> Result<SplitSummary> {
    let mut records = read_dataset(dir)?;
    let mut ids: Vec<String> = records.iter().map(|r| r.nodule_id.clone()).collect();
    ids.sort();
    ids.dedup();
    let split = split_dataset(&ids, seed, mode)?;

    let mut label = std::collections::HashMap::new();
    for (list, l) in [(&split.train, SplitLabel::Train), (&split.val, SplitLabel::Val), (&split.test, SplitLabel::Test)] {
        for id in list {
            label.insert(id.as_str(), l);
        }
    }
    for r in &mut records {
        r.split = Some(
            *label
                .get(r.nodule_id.as_str())
                .ok_or_else(|| Error::Internal(format!("{} was not assigned", r.nodule_id)))?,
        );
    }
    write_jsonl(&dir.join(DATASET_FILE), &records)?;

    let summary = SplitSummary {
        seed,
        mode,
        train: split.train.len(),
        val: split.val.len(),
        test: split.test.len(),
    };
    let mut manifest = match RunManifest::read(dir) {
        Ok(m) => m,
        Err(Error::Io { .. }) => RunManifest::new("split", serde_json::Value::Null, &dataset_lexicon(dir)?),
        Err(e) => return Err(e),
    };
    manifest.seed = Some(seed);
    manifest.split = Some(serde_json::to_value(&summary).map_err(|e| Error::Internal(e.to_string()))?);
    manifest.write(dir)?;
    Ok(summary)
}
