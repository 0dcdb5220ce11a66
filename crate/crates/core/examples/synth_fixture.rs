//! Writes the 12-nodule synthetic DICOM + XML tree and a `forge.toml` next to it.
//!
//! ```text
//! cargo run --example synth_fixture -- crates/core/tests/fixtures/lidc12
//! ```

use std::path::PathBuf;

use nodule_vqa::synth::write_fixture_tree;

const CONFIG: &str = "\
annotation_root = \".\"
dicom_root = \".\"
output_dir = \"dataset\"
cluster_threshold_mm = 5.0
min_readers = 1
seed = 42
split_mode = \"image-level\"

[window]
level = -600.0
width = 1500.0
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root: PathBuf = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("nodule-vqa-lidc12"));
    write_fixture_tree(&root)?;
    std::fs::write(root.join("forge.toml"), CONFIG)?;
    println!("fixture written to {}", root.display());
    Ok(())
}
