use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::manifest::{checksum_file, LexiconInfo, RunManifest};
use super::{dataset_lexicon, read_dataset, read_jsonl, SplitSelector, DATASET_FILE};
use crate::baselines::PredictionRecord;
use crate::characteristic::Category;
use crate::clinical::{agreement, AgreementReport, AnswerPair, CharacteristicAgreement, MissingPolicy};
use crate::error::{Error, Result};
use crate::forge::{DatasetRecord, PhraseLexicon};
use crate::metrics::{
    bleu_corpus, cider_d, meteor_lite, rouge_l, tokenize, tuple_f1, EvalCorpus, EvalItem, TupleF1, TOKENIZER_ID,
};

pub const REPORT_FILE: &str = "report.json";
pub const DEFAULT_EVAL_DIR: &str = "evaluation";

/// Caption metrics over one set of items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlgBlock {
    pub items: usize,
    pub bleu_1: f64,
    pub bleu_2: f64,
    pub bleu_3: f64,
    pub bleu_4: f64,
    pub meteor: f64,
    pub rouge_l: f64,
    /// `None` for blocks of a single item.
    pub cider: Option<f64>,
    pub tuple_f1: TupleF1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryBlock {
    pub category: Category,
    #[serde(flatten)]
    pub metrics: NlgBlock,
}

/// `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub tool_version: String,
    pub tokenizer: String,
    pub lexicon: LexiconInfo,
    pub split: SplitSelector,
    pub items: usize,
    pub pooled: NlgBlock,
    pub per_category: Vec<CategoryBlock>,
    /// Scores read from the overall finding; the headline numbers.
    pub agreement: AgreementReport,
    /// Scores read from each characteristic's own answer.
    pub agreement_per_question: AgreementReport,
}

impl MetricReport {
    pub fn category(&self, c: Category) -> Option<&NlgBlock> {
        self.per_category.iter().find(|b| b.category == c).map(|b| &b.metrics)
    }
}

fn nlg_block(corpus: &EvalCorpus, lexicon: &PhraseLexicon) -> Result<NlgBlock> {
    let bleu = bleu_corpus(corpus)?;
    Ok(NlgBlock {
        items: corpus.len(),
        bleu_1: bleu[0],
        bleu_2: bleu[1],
        bleu_3: bleu[2],
        bleu_4: bleu[3],
        meteor: meteor_lite(corpus)?,
        rouge_l: rouge_l(corpus)?,
        cider: if corpus.len() >= 2 { Some(cider_d(corpus)?) } else { None },
        tuple_f1: tuple_f1(corpus, lexicon),
    })
}

/// Scores `predictions` against the dataset items selected by `split`.
///
/// Every selected (nodule, category) pair needs exactly one prediction and
/// every prediction must name a selected pair; all violations are listed in
/// the error.
pub fn evaluate_predictions(
    records: &[DatasetRecord],
    predictions: &[PredictionRecord],
    split: SplitSelector,
    lexicon: &PhraseLexicon,
    policy: MissingPolicy,
) -> Result<MetricReport> {
    let mut expected: BTreeMap<(&str, Category), &DatasetRecord> = BTreeMap::new();
    for r in records.iter().filter(|r| split.matches(r.split)) {
        if expected.insert((r.nodule_id.as_str(), r.category), r).is_some() {
            return Err(Error::invalid(format!(
                "dataset lists {} / {} twice",
                r.nodule_id, r.category
            )));
        }
    }
    if expected.is_empty() {
        return Err(Error::invalid(format!("split `{}` has no items", split.name())));
    }

    let mut problems = Vec::new();
    let mut matched: BTreeMap<(&str, Category), &PredictionRecord> = BTreeMap::new();
    for p in predictions {
        let key = (p.nodule_id.as_str(), p.category);
        if !expected.contains_key(&key) {
            problems.push(format!("unmatched prediction {} / {}", p.nodule_id, p.category));
        } else if matched.insert(key, p).is_some() {
            problems.push(format!("duplicate prediction {} / {}", p.nodule_id, p.category));
        }
    }
    for key in expected.keys() {
        if !matched.contains_key(key) {
            problems.push(format!("missing prediction {} / {}", key.0, key.1));
        }
    }
    if !problems.is_empty() {
        return Err(Error::invalid(format!(
            "{} prediction id problem(s):\n  {}",
            problems.len(),
            problems.join("\n  ")
        )));
    }

    let item = |key: &(&str, Category)| EvalItem {
        id: format!("{}/{}", key.0, key.1),
        candidate: tokenize(&matched[key].generated_text),
        references: vec![tokenize(&expected[key].answer)],
    };
    let pooled = EvalCorpus::new(expected.keys().map(item).collect())?;
    let per_category = Category::ALL
        .par_iter()
        .filter_map(|&c| {
            let items: Vec<EvalItem> = expected.keys().filter(|k| k.1 == c).map(item).collect();
            (!items.is_empty()).then(|| {
                let corpus = EvalCorpus::new(items)?;
                Ok(CategoryBlock {
                    category: c,
                    metrics: nlg_block(&corpus, lexicon)?,
                })
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let answers: Vec<AnswerPair<'_>> = expected
        .iter()
        .map(|(key, r)| AnswerPair {
            nodule_id: key.0,
            category: key.1,
            reference: &r.answer,
            prediction: &matched[key].generated_text,
        })
        .collect();

    Ok(MetricReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        tokenizer: TOKENIZER_ID.to_string(),
        lexicon: lexicon.into(),
        split,
        items: expected.len(),
        pooled: nlg_block(&pooled, lexicon)?,
        per_category,
        agreement: agreement(&answers, crate::clinical::AnswerPath::Overall, lexicon, policy),
        agreement_per_question: agreement(&answers, crate::clinical::AnswerPath::PerQuestion, lexicon, policy),
    })
}

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub dataset_dir: PathBuf,
    pub predictions: PathBuf,
    pub split: SplitSelector,
    /// Where `report.json` goes; by default [`DEFAULT_EVAL_DIR`] next to the
    /// predictions file.
    pub out_dir: Option<PathBuf>,
    pub missing: MissingPolicy,
    pub lexicon: Option<PathBuf>,
}

pub fn cmd_evaluate(options: &EvaluateOptions) -> Result<MetricReport> {
    let records = read_dataset(&options.dataset_dir)?;
    let predictions: Vec<PredictionRecord> = read_jsonl(&options.predictions)?;
    let lexicon = match &options.lexicon {
        Some(p) => PhraseLexicon::from_file(p)?,
        None => dataset_lexicon(&options.dataset_dir)?,
    };
    let report = evaluate_predictions(&records, &predictions, options.split, &lexicon, options.missing)?;

    let out = options
        .out_dir
        .clone()
        .unwrap_or_else(|| options.predictions.parent().unwrap_or(Path::new(".")).join(DEFAULT_EVAL_DIR));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    crate::roi::write_atomic(&out.join(REPORT_FILE), text.as_bytes())?;

    let mut manifest = RunManifest::new(
        "evaluate",
        json!({
            "dataset_dir": options.dataset_dir,
            "predictions": options.predictions,
            "split": options.split,
            "missing": options.missing,
        }),
        &lexicon,
    );
    let mut dataset = checksum_file(&options.dataset_dir.join(DATASET_FILE), &options.dataset_dir)?;
    dataset.path = format!("dataset/{}", dataset.path);
    let pred_root = options.predictions.parent().unwrap_or(Path::new(""));
    let mut preds = checksum_file(&options.predictions, pred_root)?;
    preds.path = format!("predictions/{}", preds.path);
    manifest.inputs = vec![dataset, preds];
    manifest.summary = json!({ "items": report.items });
    manifest.write(&out)?;
    Ok(report)
}

/// Renders the tables of an existing `report.json`.
pub fn cmd_report(path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report: MetricReport =
        serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    Ok(render_report(&report))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

fn nlg_row(out: &mut String, name: &str, b: &NlgBlock) {
    let _ = writeln!(
        out,
        "{name:<14} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>7.3} {:>6} {:>8} {:>5}",
        b.bleu_1,
        b.bleu_2,
        b.bleu_3,
        b.bleu_4,
        b.meteor,
        b.rouge_l,
        opt(b.cider),
        opt(b.tuple_f1.f1),
        b.items
    );
}

fn agreement_table(out: &mut String, title: &str, rows: &[CharacteristicAgreement]) {
    let _ = writeln!(out, "{title}");
    let _ = write!(out, "{:<14}", "");
    for a in rows {
        let _ = write!(out, " {:>13}", a.characteristic.name());
    }
    out.push('\n');
    let mut line = |label: &str, cell: &dyn Fn(&CharacteristicAgreement) -> String| {
        let _ = write!(out, "{label:<14}");
        for a in rows {
            let _ = write!(out, " {:>13}", cell(a));
        }
        out.push('\n');
    };
    line("MAE", &|a| opt(a.mae));
    line("Consistency", &|a| opt(a.consistency));
    line("N", &|a| a.n.to_string());
    line("Skipped", &|a| a.skipped.to_string());
    if rows.iter().any(|a| a.imputed > 0) {
        line("Imputed", &|a| a.imputed.to_string());
    }
}

/// Plain-text tables: caption metrics per category, then score agreement.
pub fn render_report(report: &MetricReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "split {} | {} items | lexicon {} | tokenizer {}",
        report.split.name(),
        report.items,
        report.lexicon.version,
        report.tokenizer
    );
    out.push('\n');
    let _ = writeln!(
        out,
        "{:<14} {:>6} {:>6} {:>6} {:>6} {:>6} {:>7} {:>6} {:>8} {:>5}",
        "Category", "BLEU_1", "BLEU_2", "BLEU_3", "BLEU_4", "METEOR", "ROUGE_L", "CIDEr", "tupleF1", "N"
    );
    nlg_row(&mut out, "pooled", &report.pooled);
    for b in &report.per_category {
        nlg_row(&mut out, b.category.name(), &b.metrics);
    }
    out.push('\n');
    agreement_table(&mut out, "Agreement (overall finding)", &report.agreement.headline);
    out.push('\n');
    agreement_table(&mut out, "Agreement (per-question answers)", &report.agreement_per_question.headline);
    out.push('\n');
    agreement_table(&mut out, "Secondary characteristics (overall finding)", &report.agreement.secondary);
    out
}
