//! The file-level pipeline behind the `nodule-vqa` binary.
//!
//! Each command reads and writes plain files (JSON Lines, PNG, JSON) and
//! leaves one `manifest.json` in its output directory. Outputs depend only
//! on inputs and settings, never on thread count or clock (apart from the
//! manifest timestamp).

mod config;
mod evaluate;
mod forge;
mod generate;
mod manifest;
mod split;

use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

pub use config::{Config, ANNOTATION_ROOT_ENV, DEFAULT_SEED, DICOM_ROOT_ENV};
pub use evaluate::{
    cmd_evaluate, cmd_report, evaluate_predictions, render_report, CategoryBlock, EvaluateOptions,
    MetricReport, NlgBlock, REPORT_FILE, DEFAULT_EVAL_DIR,
};
pub use forge::{cmd_forge, ForgeOptions, ForgeSummary, ImageRecord, NoduleRecord};
pub use generate::{cmd_generate, GenerateOptions, PREDICTIONS_FILE};
pub use manifest::{checksum_file, relative, sha256_hex, FileChecksum, LexiconInfo, RunManifest, MANIFEST_FILE};
pub use split::{cmd_split, SplitSummary};

use crate::error::{Error, Result};
use crate::forge::{DatasetRecord, PhraseLexicon, SplitLabel};

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const NODULES_FILE: &str = "nodules.jsonl";
pub const IMAGES_MANIFEST_FILE: &str = "images.jsonl";
/// Canonical copy of the lexicon a dataset was forged with.
pub const LEXICON_FILE: &str = "lexicon.txt";

/// Which split an evaluation or generation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SplitSelector {
    #[default]
    All,
    Train,
    Val,
    Test,
}

impl SplitSelector {
    pub fn matches(self, split: Option<SplitLabel>) -> bool {
        match self {
            SplitSelector::All => true,
            SplitSelector::Train => split == Some(SplitLabel::Train),
            SplitSelector::Val => split == Some(SplitLabel::Val),
            SplitSelector::Test => split == Some(SplitLabel::Test),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SplitSelector::All => "all",
            SplitSelector::Train => "train",
            SplitSelector::Val => "val",
            SplitSelector::Test => "test",
        }
    }
}

/// Serializes one record per line.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).map_err(|e| Error::Internal(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    crate::roi::write_atomic(path, to_jsonl(records)?.as_bytes())
}

/// Reads JSON Lines; blank lines are ignored, bad lines are reported with
/// their line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Record {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn read_dataset(dir: &Path) -> Result<Vec<DatasetRecord>> {
    read_jsonl(&dir.join(DATASET_FILE))
}

/// The lexicon stored with a dataset, else the bundled default.
pub fn dataset_lexicon(dir: &Path) -> Result<PhraseLexicon> {
    let path = dir.join(LEXICON_FILE);
    if path.exists() {
        PhraseLexicon::from_file(&path)
    } else {
        Ok(PhraseLexicon::default())
    }
}

/// Runs `f` on a rayon pool of `jobs` threads (all cores when `None`).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::Usage("--jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Internal(e.to_string()))?;
    Ok(pool.install(f))
}
