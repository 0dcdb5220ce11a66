use std::path::PathBuf;

use serde_json::json;

use super::manifest::{checksum_file, RunManifest};
use super::{dataset_lexicon, read_dataset, write_jsonl, SplitSelector, DATASET_FILE};
use crate::baselines::{generate, GeneratorConfig, GeneratorKind};
use crate::error::{Error, Result};
use crate::forge::{PhraseLexicon, SplitLabel};

pub const PREDICTIONS_FILE: &str = "predictions.jsonl";

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub dataset_dir: PathBuf,
    pub generator: GeneratorConfig,
    pub eval_split: SplitSelector,
    pub out_dir: PathBuf,
    pub lexicon: Option<PathBuf>,
}

/// Writes `predictions.jsonl` and `manifest.json` into `out_dir`; returns the
/// number of predictions.
pub fn cmd_generate(options: &GenerateOptions) -> Result<usize> {
    let records = read_dataset(&options.dataset_dir)?;
    let lexicon = match &options.lexicon {
        Some(p) => PhraseLexicon::from_file(p)?,
        None => dataset_lexicon(&options.dataset_dir)?,
    };
    let labelled = records.iter().any(|r| r.split.is_some());
    if options.eval_split != SplitSelector::All && !labelled {
        return Err(Error::invalid(format!(
            "dataset has no split labels; run `split` before selecting `{}`",
            options.eval_split.name()
        )));
    }
    let eval: Vec<_> = records
        .iter()
        .filter(|r| options.eval_split.matches(r.split))
        .cloned()
        .collect();
    if eval.is_empty() {
        return Err(Error::invalid(format!("split `{}` has no items", options.eval_split.name())));
    }
    let train: Vec<_> = records
        .iter()
        .filter(|r| r.split == Some(SplitLabel::Train))
        .cloned()
        .collect();
    if options.generator.kind == GeneratorKind::Majority && train.is_empty() {
        return Err(Error::invalid(
            "majority baseline needs train split labels; run `split` first",
        ));
    }

    let predictions = generate(&options.generator, &train, &eval, &lexicon)?;
    let out = &options.out_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    write_jsonl(&out.join(PREDICTIONS_FILE), &predictions)?;

    let mut manifest = RunManifest::new(
        "generate-baseline",
        json!({
            "generator": options.generator,
            "eval_split": options.eval_split,
            "dataset_dir": options.dataset_dir,
        }),
        &lexicon,
    );
    manifest.seed = Some(options.generator.seed);
    let mut input = checksum_file(&options.dataset_dir.join(DATASET_FILE), &options.dataset_dir)?;
    input.path = format!("dataset/{}", input.path);
    manifest.inputs = vec![input];
    manifest.summary = json!({ "predictions": predictions.len() });
    manifest.write(out)?;
    Ok(predictions.len())
}

