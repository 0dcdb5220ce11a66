//! The whole pipeline on the synthetic fixture: forge, split, echo and noisy
//! baselines, evaluation and the rendered report.
//!
//! ```text
//! cargo run --example end_to_end [WORK_DIR]
//! ```

use std::path::PathBuf;

use nodule_vqa::baselines::{GeneratorConfig, GeneratorKind};
use nodule_vqa::clinical::MissingPolicy;
use nodule_vqa::forge::SplitMode;
use nodule_vqa::pipeline::{
    cmd_evaluate, cmd_forge, cmd_generate, cmd_split, render_report, Config, EvaluateOptions, ForgeOptions,
    GenerateOptions, SplitSelector, PREDICTIONS_FILE,
};
use nodule_vqa::synth::write_fixture_tree;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let work = std::env::args_os().nth(1).map_or_else(|| tmp.path().to_path_buf(), PathBuf::from);
    let input = work.join("lidc");
    write_fixture_tree(&input)?;

    let config = Config::parse(
        "annotation_root = \"lidc\"\ndicom_root = \"lidc\"\noutput_dir = \"dataset\"\n",
        &work,
    )?;
    let summary = cmd_forge(&config, &ForgeOptions::default())?;
    println!("{summary}\n");
    let dataset = config.output_dir.clone();
    println!("{}\n", cmd_split(&dataset, config.seed, SplitMode::ImageLevel)?);

    for (kind, rate) in [(GeneratorKind::Echo, 0.0), (GeneratorKind::Noisy, 0.5)] {
        let out = work.join(format!("{kind:?}").to_lowercase());
        cmd_generate(&GenerateOptions {
            dataset_dir: dataset.clone(),
            generator: GeneratorConfig {
                kind,
                corruption_rate: rate,
                seed: config.seed,
            },
            eval_split: SplitSelector::All,
            out_dir: out.clone(),
            lexicon: None,
        })?;
        let report = cmd_evaluate(&EvaluateOptions {
            dataset_dir: dataset.clone(),
            predictions: out.join(PREDICTIONS_FILE),
            split: SplitSelector::All,
            out_dir: None,
            missing: MissingPolicy::Skip,
            lexicon: None,
        })?;
        println!("== {kind:?} (rate {rate})\n{}", render_report(&report));
    }
    Ok(())
}
