//! Echo, majority and noisy baselines on a uniform synthetic dataset, scored
//! in memory.
//!
//! ```text
//! cargo run --example baseline_eval [RATE] [SEED]
//! ```

use nodule_vqa::baselines::{generate, GeneratorConfig, GeneratorKind};
use nodule_vqa::clinical::MissingPolicy;
use nodule_vqa::forge::{PhraseLexicon, SplitLabel};
use nodule_vqa::pipeline::{evaluate_predictions, SplitSelector};
use nodule_vqa::synth::{synthetic_records, uniform_profiles};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let rate: f64 = args.next().map_or(Ok(0.25), |a| a.parse())?;
    let seed: u64 = args.next().map_or(Ok(42), |a| a.parse())?;

    let lexicon = PhraseLexicon::default();
    let mut records = synthetic_records(&uniform_profiles(260), &lexicon);
    for (i, r) in records.iter_mut().enumerate() {
        r.split = Some(if i / 7 < 52 { SplitLabel::Test } else { SplitLabel::Train });
    }
    let train: Vec<_> = records.iter().filter(|r| r.split == Some(SplitLabel::Train)).cloned().collect();
    let test: Vec<_> = records.iter().filter(|r| r.split == Some(SplitLabel::Test)).cloned().collect();

    for kind in [GeneratorKind::Echo, GeneratorKind::Majority, GeneratorKind::Noisy] {
        let config = GeneratorConfig {
            kind,
            corruption_rate: rate,
            seed,
        };
        let predictions = generate(&config, &train, &test, &lexicon)?;
        let report = evaluate_predictions(&records, &predictions, SplitSelector::Test, &lexicon, MissingPolicy::Skip)?;
        let agreement: Vec<String> = report
            .agreement
            .headline
            .iter()
            .map(|a| format!("{} MAE {:.3}", a.characteristic.name(), a.mae.unwrap_or(f64::NAN)))
            .collect();
        println!(
            "{:<8} BLEU_4 {:.3} CIDEr {:.3}  {}",
            format!("{kind:?}"),
            report.pooled.bleu_4,
            report.pooled.cider.unwrap_or(f64::NAN),
            agreement.join(", ")
        );
    }
    Ok(())
}
