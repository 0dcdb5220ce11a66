//! Corpus-level BLEU-1..4, METEOR-lite, ROUGE-L, CIDEr-D and tuple-F1 on a
//! handful of generated findings.
//!
//! ```text
//! cargo run --example score_captions
//! ```

use nodule_vqa::forge::PhraseLexicon;
use nodule_vqa::metrics::{bleu_corpus, cider_d, meteor_lite, rouge_l, tokenize, tuple_f1, EvalCorpus, TOKENIZER_ID};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pairs = [
        (
            "a",
            "The nodule is oval in shape, solid internally, with sharp margins.",
            "The nodule is oval in shape, solid internally, with sharp margins.",
        ),
        (
            "b",
            "The nodule is spherical in shape, solid internally, with sharp margins.",
            "The nodule is nearly round in shape, solid internally, with mostly well-defined margins.",
        ),
        (
            "c",
            "The nodule is elongated in shape, mixed internally, with indistinct margins. There is slight spiculation.",
            "The nodule is elongated in shape, mixed internally, with poorly defined margins. There is marked spiculation.",
        ),
    ];
    println!("tokenizer {TOKENIZER_ID}");
    println!("tokens of b: {:?}", tokenize(pairs[1].1).tokens());

    let corpus = EvalCorpus::from_texts(pairs)?;
    let bleu = bleu_corpus(&corpus)?;
    println!("BLEU_1..4 {:.4} {:.4} {:.4} {:.4}", bleu[0], bleu[1], bleu[2], bleu[3]);
    println!("METEOR   {:.4}", meteor_lite(&corpus)?);
    println!("ROUGE_L  {:.4}", rouge_l(&corpus)?);
    println!("CIDEr-D  {:.4}", cider_d(&corpus)?);
    let t = tuple_f1(&corpus, &PhraseLexicon::default());
    println!("tuple-F1 {:?} over {} items ({} skipped)", t.f1, t.evaluated, t.skipped);
    Ok(())
}
