use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Every nodule image is a unit.
    #[default]
    ImageLevel,
    /// All nodules of a patient land in the same split.
    PatientLevel,
}

impl SplitMode {
    pub fn name(self) -> &'static str {
        match self {
            SplitMode::ImageLevel => "image-level",
            SplitMode::PatientLevel => "patient-level",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
    pub mode: SplitMode,
}

/// 7:2:1 allocation: `train = floor(0.7 n)`, the remainder `r` is divided
/// `val = round(2r / 3)`, `test = r - val`.
pub fn split_sizes(n: usize) -> Result<(usize, usize, usize)> {
    if n < 3 {
        return Err(Error::invalid(format!("cannot split {n} units; need at least 3")));
    }
    let train = 7 * n / 10;
    let rest = n - train;
    // 2r/3 never ends in .5, so this is exact rounding
    let val = (2 * rest + 1) / 3;
    Ok((train, val, rest - val))
}

/// Patient part of a nodule id of the form `{patient}_n{k}`.
pub fn patient_id_of(nodule_id: &str) -> &str {
    match nodule_id.rfind("_n") {
        Some(i) if nodule_id[i + 2..].chars().all(|c| c.is_ascii_digit()) && i + 2 < nodule_id.len() => {
            &nodule_id[..i]
        }
        _ => nodule_id,
    }
}

/// Seeded shuffle of the sorted units, then [`split_sizes`] allocation.
///
/// In patient-level mode the units are patients (see [`patient_id_of`]) and
/// each patient's nodules follow it. Output lists are sorted.
pub fn split_dataset(nodule_ids: &[String], seed: u64, mode: SplitMode) -> Result<DatasetSplit> {
    let mut sorted: Vec<&String> = nodule_ids.iter().collect();
    sorted.sort();
    if let Some(dup) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::invalid(format!("duplicate nodule id {}", dup[0])));
    }

    let mut units: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for id in sorted {
        let key = match mode {
            SplitMode::ImageLevel => id.as_str(),
            SplitMode::PatientLevel => patient_id_of(id),
        };
        units.entry(key).or_default().push(id.clone());
    }
    let mut units: Vec<Vec<String>> = units.into_values().collect();
    let (n_train, n_val, _) = split_sizes(units.len())?;
    SplitMix64::new(seed).shuffle(&mut units);

    let mut split = DatasetSplit {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
        seed,
        mode,
    };
    for (k, unit) in units.into_iter().enumerate() {
        let bucket = if k < n_train {
            &mut split.train
        } else if k < n_train + n_val {
            &mut split.val
        } else {
            &mut split.test
        };
        bucket.extend(unit);
    }
    split.train.sort();
    split.val.sort();
    split.test.sort();
    Ok(split)
}
