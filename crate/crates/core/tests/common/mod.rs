//! Helpers shared by the integration test targets.
#![allow(dead_code)]

pub mod cider_oracle;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nodule_vqa::lidc::{Contour, NoduleCluster, Point3, ReaderNodule};
use nodule_vqa::pipeline::{cmd_forge, Config, ForgeOptions, ForgeSummary};

/// The committed 12-nodule DICOM + XML tree.
pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/lidc12")
}

pub fn fixture_config() -> Config {
    Config::load(&fixture_dir().join("forge.toml")).expect("fixture config")
}

pub fn forge_fixture(out: &Path) -> ForgeSummary {
    cmd_forge(
        &fixture_config(),
        &ForgeOptions {
            output_dir: Some(out.to_path_buf()),
            min_readers: None,
        },
    )
    .expect("forge fixture")
}

/// Hand-computed ROI sides of the fixture nodules, in nodule id order.
///
/// Every outline is an axis-aligned `w x h` pixel rectangle (pooled over
/// readers), so the side is `round(2 * sqrt(w^2 + h^2))` whatever the spacing:
/// 7x8 -> 21, 3x4 -> 10, 2x1 -> 4 clamped to 8, 5x12 -> 26, 8x6 -> 20,
/// 5x5 -> 14, 9x12 -> 30, 8x15 -> 34, 4x4 -> 11, 8x8 -> 23, 10x10 -> 28,
/// 12x16 -> 40.
pub const FIXTURE_SIDES: [(&str, u32); 12] = [
    ("LIDC-SYN-0001_n001", 21),
    ("LIDC-SYN-0001_n002", 10),
    ("LIDC-SYN-0001_n003", 8),
    ("LIDC-SYN-0002_n001", 26),
    ("LIDC-SYN-0002_n002", 20),
    ("LIDC-SYN-0002_n003", 14),
    ("LIDC-SYN-0003_n001", 30),
    ("LIDC-SYN-0003_n002", 34),
    ("LIDC-SYN-0003_n003", 11),
    ("LIDC-SYN-0004_n001", 23),
    ("LIDC-SYN-0004_n002", 28),
    ("LIDC-SYN-0004_n003", 40),
];

/// A cluster whose readers give every characteristic the same score tuple.
pub fn cluster_of_scores(scores: &[i64]) -> NoduleCluster {
    let members = scores
        .iter()
        .enumerate()
        .map(|(i, &s)| ReaderNodule {
            reader_id: format!("r{i}"),
            nodule_id: format!("m{i}"),
            contours: vec![Contour {
                sop_uid: "1.2.3".into(),
                z_position: 0.0,
                inclusion: true,
                points: vec![(0, 0), (1, 1)],
            }],
            characteristics: [
                "sphericity",
                "margin",
                "texture",
                "lobulation",
                "spiculation",
                "calcification",
            ]
            .iter()
            .map(|k| (k.to_string(), s))
            .collect::<BTreeMap<_, _>>(),
        })
        .collect();
    NoduleCluster {
        nodule_id: "c".into(),
        members,
        center: Point3 { x: 0.0, y: 0.0, z: 0.0 },
        long_axis_diameter: 1.0,
        representative_slice: "1.2.3".into(),
    }
}

/// Median by order statistics found with counting, halves rounded up.
pub fn median_oracle(scores: &[i64]) -> i64 {
    let n = scores.len();
    let kth = |k: usize| {
        // smallest v with at least k values <= v
        (1..=6)
            .find(|&v| scores.iter().filter(|&&s| s <= v).count() >= k)
            .expect("scores in 1..=6")
    };
    if n % 2 == 1 {
        kth(n / 2 + 1)
    } else {
        let mid = (kth(n / 2) + kth(n / 2 + 1)) as f64 / 2.0;
        (mid + 0.5).floor() as i64
    }
}

/// Expected MAE of noisy corruption at `rate`: each truth `t` is replaced
/// with probability `rate` by a value drawn uniformly from the other scores
/// in `1..=max`, enumerated pair by pair.
pub fn expected_noisy_mae(truths: &[u8], max: u8, rate: f64) -> f64 {
    let mut total = 0.0;
    for &t in truths {
        let mut sum = 0.0;
        let mut count = 0.0;
        for r in 1..=max {
            if r != t {
                sum += f64::from(r.abs_diff(t));
                count += 1.0;
            }
        }
        total += rate * sum / count;
    }
    total / truths.len() as f64
}

/// Every file under `dir` as (relative path, bytes), sorted by path.
pub fn all_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    walkdir::WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .map(|e| e.expect("walk"))
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            let rel = e.path().strip_prefix(dir).unwrap().to_string_lossy().into_owned();
            (rel, std::fs::read(e.path()).unwrap())
        })
        .collect()
}
