//! Build a pulmonary-nodule visual question answering dataset from
//! LIDC-style structured annotations, and score generated findings.
//!
//! The crate is organised along the pipeline:
//!
//! - [`lidc`]: annotation XML and DICOM slice metadata, cross-reader nodule
//!   clustering and median score aggregation.
//! - [`roi`]: Hounsfield conversion, display windowing and square ROI crops.
//! - [`forge`]: the phrase lexicon, finding sentences, the seven question/answer
//!   pairs per nodule and the train/val/test split.
//! - [`metrics`]: corpus BLEU, METEOR-lite, ROUGE-L, CIDEr-D and tuple-F1.
//! - [`clinical`]: score extraction from generated text, MAE and consistency.
//! - [`baselines`]: echo, majority and noisy reference generators.
//! - [`pipeline`]: config-driven `forge` / `split` / `generate-baseline` /
//!   `evaluate` / `report` commands backing the `nodule-vqa` binary.
//!
//! See the crate's `examples/` directory for one runnable program per stage.

pub mod baselines;
pub mod characteristic;
pub mod clinical;
pub mod dicom;
pub mod error;
pub mod forge;
pub mod lidc;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod roi;
pub mod synth;

pub use characteristic::{Category, Characteristic, CharacteristicProfile};
pub use error::{Error, Result};
