//! Score-to-phrase findings, the seven question/answer pairs per nodule, and
//! the dataset split.

mod findings;
mod lexicon;
mod split;

pub use findings::{compose_finding, qa_pairs, DatasetRecord, SplitLabel, VqaItem};
pub use lexicon::{PhraseLexicon, PhraseMatch};
pub use split::{patient_id_of, split_dataset, split_sizes, DatasetSplit, SplitMode};
