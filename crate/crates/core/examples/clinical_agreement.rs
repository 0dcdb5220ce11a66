//! Reads scores back out of generated findings and reports MAE and
//! consistency per characteristic, under both missing-score policies.
//!
//! ```text
//! cargo run --example clinical_agreement
//! ```

use nodule_vqa::characteristic::Category;
use nodule_vqa::clinical::{agreement, AnswerPair, AnswerPath, MissingPolicy};
use nodule_vqa::forge::PhraseLexicon;

fn main() {
    let lexicon = PhraseLexicon::default();
    let overall = |id, reference, prediction| AnswerPair {
        nodule_id: id,
        category: Category::Overall,
        reference,
        prediction,
    };
    let answers = [
        overall(
            "n1",
            "The nodule is oval in shape, solid internally, with sharp margins.",
            "The nodule is nearly round in shape, solid internally, with sharp margins.",
        ),
        overall(
            "n2",
            "The nodule is linear in shape, mixed internally, with indistinct margins. There is evident spiculation.",
            "The nodule is linear in shape, pure ground-glass internally, with indistinct margins.",
        ),
        overall(
            "n3",
            "The nodule is spherical in shape, solid internally, with moderately defined margins.",
            "A nodule is present.",
        ),
    ];

    for policy in [MissingPolicy::Skip, MissingPolicy::WorstCase] {
        let report = agreement(&answers, AnswerPath::Overall, &lexicon, policy);
        println!("policy {policy:?}");
        for a in report.headline.iter().chain(&report.secondary) {
            println!(
                "  {:<14} n {} skipped {} imputed {} MAE {:?} consistency {:?} (d_max {})",
                a.characteristic.name(),
                a.n,
                a.skipped,
                a.imputed,
                a.mae,
                a.consistency,
                a.d_max
            );
        }
    }
}
