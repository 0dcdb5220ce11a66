//! Renders the seven question/answer pairs of a nodule from its scores and
//! reads the scores back out of the overall finding.
//!
//! ```text
//! cargo run --example compose_findings [LEXICON]
//! ```

use nodule_vqa::characteristic::{Characteristic, CharacteristicProfile};
use nodule_vqa::clinical::extract_scores;
use nodule_vqa::forge::{compose_finding, qa_pairs, PhraseLexicon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lexicon = match std::env::args_os().nth(1) {
        Some(path) => PhraseLexicon::from_file(path.as_ref())?,
        None => PhraseLexicon::default(),
    };
    println!("lexicon {}", lexicon.version());

    let profile = CharacteristicProfile {
        sphericity: 4,
        margin: 2,
        texture: 5,
        lobulation: 3,
        spiculation: 4,
        calcification: 6,
    };
    for item in qa_pairs("LIDC-IDRI-0001_n001", "images/LIDC-IDRI-0001_n001.png", &profile, &lexicon) {
        println!("[{}] {}\n    {}", item.category, item.question, item.answer);
    }

    let finding = compose_finding(&profile, &lexicon);
    let back = extract_scores(&finding, &lexicon);
    for c in Characteristic::ALL {
        println!("{:<14} composed {}  extracted {:?}", c.name(), profile.get(c), back.get(c));
    }
    Ok(())
}
