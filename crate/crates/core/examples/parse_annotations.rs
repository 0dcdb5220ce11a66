//! Parses one patient's annotation XML, clusters the reader marks across
//! readers and prints the median-aggregated scores of each nodule.
//!
//! ```text
//! cargo run --example parse_annotations [PATIENT_DIR]
//! ```
//! Without an argument the synthetic fixture is written to a temp dir and its
//! first patient is used.

use std::path::PathBuf;

use nodule_vqa::characteristic::Characteristic;
use nodule_vqa::dicom::read_header;
use nodule_vqa::lidc::{
    aggregate_scores, build_slice_index, cluster_nodules, parse_annotation_file, DEFAULT_CLUSTER_THRESHOLD_MM,
};
use nodule_vqa::synth::write_fixture_tree;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let dir = match std::env::args_os().nth(1) {
        Some(arg) => PathBuf::from(arg),
        None => {
            write_fixture_tree(tmp.path())?;
            tmp.path().join("LIDC-SYN-0001")
        }
    };

    let annotation = parse_annotation_file(&std::fs::read(dir.join("annotation.xml"))?)?;
    println!(
        "series {} : {} reader marks, {} small marks, {} non-nodules",
        annotation.series_uid.as_deref().unwrap_or("?"),
        annotation.nodules.len(),
        annotation.small_marks.len(),
        annotation.non_nodules.len()
    );

    let mut headers = Vec::new();
    for entry in std::fs::read_dir(&dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "dcm") {
            headers.push(read_header(&path)?);
        }
    }
    let index = build_slice_index(&headers)?;

    for cluster in cluster_nodules(&annotation.nodules, &index, DEFAULT_CLUSTER_THRESHOLD_MM)? {
        let profile = aggregate_scores(&cluster)?;
        let scores: Vec<String> = Characteristic::ALL
            .iter()
            .map(|&c| format!("{}={}", c.name(), profile.get(c)))
            .collect();
        println!(
            "{}: {} readers, center z {:.1} mm, long axis {:.2} mm, {}",
            cluster.nodule_id,
            cluster.members.len(),
            cluster.center.z,
            cluster.long_axis_diameter,
            scores.join(" ")
        );
    }
    Ok(())
}
